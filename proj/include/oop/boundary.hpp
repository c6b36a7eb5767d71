#ifndef OOP_BOUNDARY_HPP
#define OOP_BOUNDARY_HPP

#include "oop/dataset.hpp"
#include "oop/models.hpp"

#include <array>
#include <string>
#include <vector>

namespace oop {

/// Per-row distance from the decision boundary; larger means farther.
struct DistanceReport {
    std::string dataset;
    Family family = Family::svm;
    Vector distances;  // aligned to training rows, finite and >= 0

    Eigen::Index size() const { return distances.size(); }
};

/// Family-specific distance of every training row:
///   SVM, MLP  |score of the predicted class|
///   DT        depth of the leaf reached
///   RF        mean leaf depth over the trees
///   KNN       largest of the k nearest-neighbor distances, self excluded
///   GNB       max log posterior under the model fitted on the other half, minus the global minimum
DistanceReport compute_distances(const TrainedModel& model, const Dataset& train_set);

/// The `count` farthest rows, by descending distance then ascending index.
std::vector<Eigen::Index> top_outliers(const DistanceReport& report, Eigen::Index count);

/// Smallest one-vs-rest geometric margin 1 / ||w||. SVM only.
double svm_margin_score(const TrainedModel& model);

/// Fraction of probe rows on which the two models disagree.
double boundary_disagreement(const TrainedModel& clean, const TrainedModel& poisoned, const Dataset& probe);

/// Row indices of the two halves used by the GNB distance: rows of each class
/// alternate between the halves in order of appearance.
std::array<std::vector<Eigen::Index>, 2> alternating_halves(const Labels& labels, int n_classes);

}  // namespace oop

#endif  // OOP_BOUNDARY_HPP
