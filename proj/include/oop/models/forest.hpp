#ifndef OOP_MODELS_FOREST_HPP
#define OOP_MODELS_FOREST_HPP

#include "oop/models/tree.hpp"

#include <cstdint>
#include <vector>

namespace oop {

struct ForestParams {
    int trees = 3;
    TreeParams tree;
    bool bootstrap = true;
    // Features per split; 0 selects max(1, floor(sqrt(n_features))).
    int max_features = 0;
};

struct ForestState {
    std::vector<TreeState> trees;
};

ForestState fit_forest(const ForestParams& params, const Matrix& x, const Labels& y, int n_classes,
                       std::uint64_t seed);

/// Fraction of trees voting for each class.
Matrix forest_votes(const ForestState& forest, const Matrix& x, int n_classes);

/// Mean leaf depth across trees.
Vector forest_leaf_depths(const ForestState& forest, const Matrix& x);

/// Per-tree normalized importances averaged, then renormalized.
Vector forest_importance(const ForestState& forest, Eigen::Index n_features);

}  // namespace oop

#endif  // OOP_MODELS_FOREST_HPP
