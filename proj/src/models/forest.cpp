#include "oop/models/forest.hpp"

#include <cmath>
#include <random>

namespace oop {

ForestState fit_forest(const ForestParams& params, const Matrix& x, const Labels& y, int n_classes,
                       std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    const auto d = static_cast<int>(x.cols());
    const int max_features =
        params.max_features > 0 ? params.max_features : std::max(1, static_cast<int>(std::floor(std::sqrt(d))));

    ForestState forest;
    for (int t = 0; t < params.trees; ++t) {
        const std::uint64_t tree_seed = mix_seed(seed + static_cast<std::uint64_t>(t));
        std::mt19937_64 rng(tree_seed);
        Vector weights = Vector::Ones(n);
        if (params.bootstrap) {
            weights.setZero();
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            for (Eigen::Index k = 0; k < n; ++k) weights(pick(rng)) += 1.0;
        }
        TreeGrowOptions options;
        options.max_features = max_features;
        options.seed = mix_seed(tree_seed);
        forest.trees.push_back(grow_tree(params.tree, x, y, n_classes, weights, options));
    }
    return forest;
}

Matrix forest_votes(const ForestState& forest, const Matrix& x, int n_classes) {
    Matrix votes = Matrix::Zero(x.rows(), n_classes);
    for (const auto& tree : forest.trees) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree.leaf_of(x.row(i)))];
            votes(i, argmax_first(leaf.value)) += 1.0;
        }
    }
    return votes / static_cast<double>(forest.trees.size());
}

Vector forest_leaf_depths(const ForestState& forest, const Matrix& x) {
    Vector sum = Vector::Zero(x.rows());
    for (const auto& tree : forest.trees) sum += tree_leaf_depths(tree, x);
    return sum / static_cast<double>(forest.trees.size());
}

Vector forest_importance(const ForestState& forest, Eigen::Index n_features) {
    Vector sum = Vector::Zero(n_features);
    for (const auto& tree : forest.trees) sum += tree.importance;
    const double total = sum.sum();
    if (total > 0.0) sum /= total;
    return sum;
}

}  // namespace oop
