#ifndef OOP_MODELS_TREE_HPP
#define OOP_MODELS_TREE_HPP

#include "oop/common.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace oop {

enum class Impurity { gini };

struct TreeParams {
    Impurity impurity = Impurity::gini;
    // Nodes with fewer rows than this become leaves.
    int min_samples_split = 2;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x[feature] <= threshold go left
    int left = -1;
    int right = -1;
    int depth = 0;
    double impurity = 0.0;
    double weight = 0.0;  // total sample weight reaching the node
    Vector value;  // per-class sample weight
};

struct TreeState {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    Eigen::Index n_features = 0;
    int n_classes = 0;
    Vector importance;  // normalized impurity-decrease importance

    /// Index of the leaf reached by `row`.
    template <typename Derived>
    int leaf_of(const Eigen::DenseBase<Derived>& row) const {
        int node = 0;
        while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
            node = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return node;
    }

    int max_depth() const;
};

struct TreeGrowOptions {
    // Features examined per split; <= 0 or >= n_features means all, in index order.
    int max_features = 0;
    std::uint64_t seed = 0;
};

/// CART growth with best-split search. `weights` holds a non-negative
/// multiplicity per training row (rows with zero weight are ignored).
TreeState grow_tree(const TreeParams& params, const Matrix& x, const Labels& y, int n_classes,
                    const Vector& weights, const TreeGrowOptions& options = {});

/// Per-row leaf class fractions.
Matrix tree_proba(const TreeState& tree, const Matrix& x);

/// Depth of the leaf each row lands in (root is depth 0).
Vector tree_leaf_depths(const TreeState& tree, const Matrix& x);

}  // namespace oop

#endif  // OOP_MODELS_TREE_HPP
