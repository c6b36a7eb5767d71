#include "oop/models/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace oop {

namespace {

double gini(const Vector& value, double weight) {
    if (weight <= 0.0) return 0.0;
    return 1.0 - (value.array() / weight).square().sum();
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double proxy = -1.0;  // sum_c l_c^2 / W_l + sum_c r_c^2 / W_r, larger is better
};

struct Pending {
    int node;
    std::vector<Eigen::Index> rows;
};

class Grower {
public:
    Grower(const TreeParams& params, const Matrix& x, const Labels& y, int n_classes, const Vector& weights,
           const TreeGrowOptions& options)
        : params_(params), x_(x), y_(y), n_classes_(n_classes), weights_(weights), rng_(options.seed) {
        const auto d = static_cast<int>(x.cols());
        max_features_ = (options.max_features <= 0 || options.max_features >= d) ? d : options.max_features;
        feature_order_.resize(static_cast<std::size_t>(d));
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
    }

    TreeState run() {
        TreeState tree;
        tree.n_features = x_.cols();
        tree.n_classes = n_classes_;
        tree.importance = Vector::Zero(x_.cols());

        std::vector<Eigen::Index> root_rows;
        for (Eigen::Index i = 0; i < x_.rows(); ++i) {
            if (weights_(i) > 0.0) root_rows.push_back(i);
        }
        tree.nodes.push_back(make_node(root_rows, 0));
        std::vector<Pending> stack;
        stack.push_back({0, std::move(root_rows)});

        while (!stack.empty()) {
            Pending item = std::move(stack.back());
            stack.pop_back();
            const TreeNode node = tree.nodes[static_cast<std::size_t>(item.node)];
            if (static_cast<int>(item.rows.size()) < params_.min_samples_split || node.impurity <= 0.0) continue;

            const Split best = find_split(item.rows);
            if (best.feature < 0) continue;

            std::vector<Eigen::Index> left_rows;
            std::vector<Eigen::Index> right_rows;
            for (Eigen::Index r : item.rows) {
                (x_(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
            }
            TreeNode left = make_node(left_rows, node.depth + 1);
            TreeNode right = make_node(right_rows, node.depth + 1);
            tree.importance(best.feature) +=
                node.weight * node.impurity - left.weight * left.impurity - right.weight * right.impurity;

            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(std::move(left));
            const int right_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(std::move(right));
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(item.node)];
            parent.feature = best.feature;
            parent.threshold = best.threshold;
            parent.left = left_id;
            parent.right = right_id;
            // Right pushed first so the left subtree is expanded first.
            stack.push_back({right_id, std::move(right_rows)});
            stack.push_back({left_id, std::move(left_rows)});
        }

        const double total = tree.importance.sum();
        if (total > 0.0) tree.importance /= total;
        return tree;
    }

private:
    TreeNode make_node(const std::vector<Eigen::Index>& rows, int depth) const {
        TreeNode node;
        node.depth = depth;
        node.value = Vector::Zero(n_classes_);
        for (Eigen::Index r : rows) node.value(y_(r)) += weights_(r);
        node.weight = node.value.sum();
        node.impurity = gini(node.value, node.weight);
        return node;
    }

    bool constant_in(const std::vector<Eigen::Index>& rows, int f) const {
        const double first = x_(rows.front(), f);
        return std::all_of(rows.begin(), rows.end(), [&](Eigen::Index r) { return x_(r, f) == first; });
    }

    std::vector<int> candidate_features(const std::vector<Eigen::Index>& rows) {
        const int d = static_cast<int>(x_.cols());
        std::vector<int> out;
        if (max_features_ >= d) {
            for (int f = 0; f < d; ++f) {
                if (!constant_in(rows, f)) out.push_back(f);
            }
            return out;
        }
        // Constant features do not use up the per-split budget.
        std::shuffle(feature_order_.begin(), feature_order_.end(), rng_);
        for (int f : feature_order_) {
            if (static_cast<int>(out.size()) == max_features_) break;
            if (!constant_in(rows, f)) out.push_back(f);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    Split find_split(const std::vector<Eigen::Index>& rows) {
        Split best;
        std::vector<std::pair<double, Eigen::Index>> sorted(rows.size());
        Vector left(n_classes_);
        Vector right(n_classes_);
        Vector total = Vector::Zero(n_classes_);
        for (Eigen::Index r : rows) total(y_(r)) += weights_(r);

        for (int f : candidate_features(rows)) {
            for (std::size_t k = 0; k < rows.size(); ++k) sorted[k] = {x_(rows[k], f), rows[k]};
            std::sort(sorted.begin(), sorted.end());
            left.setZero();
            double w_left = 0.0;
            const double w_total = total.sum();
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                const Eigen::Index r = sorted[k].second;
                left(y_(r)) += weights_(r);
                w_left += weights_(r);
                if (!(sorted[k].first < sorted[k + 1].first)) continue;
                right = total - left;
                const double w_right = w_total - w_left;
                const double proxy = left.squaredNorm() / w_left + right.squaredNorm() / w_right;
                if (proxy > best.proxy) {
                    best.proxy = proxy;
                    best.feature = f;
                    double threshold = 0.5 * (sorted[k].first + sorted[k + 1].first);
                    if (threshold >= sorted[k + 1].first) threshold = sorted[k].first;
                    best.threshold = threshold;
                }
            }
        }
        return best;
    }

    const TreeParams& params_;
    const Matrix& x_;
    const Labels& y_;
    int n_classes_;
    const Vector& weights_;
    std::mt19937_64 rng_;
    int max_features_;
    std::vector<int> feature_order_;
};

}  // namespace

int TreeState::max_depth() const {
    int depth = 0;
    for (const auto& n : nodes) depth = std::max(depth, n.depth);
    return depth;
}

TreeState grow_tree(const TreeParams& params, const Matrix& x, const Labels& y, int n_classes, const Vector& weights,
                    const TreeGrowOptions& options) {
    return Grower(params, x, y, n_classes, weights, options).run();
}

Matrix tree_proba(const TreeState& tree, const Matrix& x) {
    Matrix out(x.rows(), tree.n_classes);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree.leaf_of(x.row(i)))];
        out.row(i) = (leaf.value / leaf.weight).transpose();
    }
    return out;
}

Vector tree_leaf_depths(const TreeState& tree, const Matrix& x) {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out(i) = tree.nodes[static_cast<std::size_t>(tree.leaf_of(x.row(i)))].depth;
    return out;
}

}  // namespace oop
