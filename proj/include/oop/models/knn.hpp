#ifndef OOP_MODELS_KNN_HPP
#define OOP_MODELS_KNN_HPP

#include "oop/common.hpp"

#include <utility>
#include <vector>

namespace oop {

struct KnnParams {
    int k = 5;
};

struct KnnState {
    RowMatrix points;  // training rows, stored verbatim
    Labels labels;
    int k = 5;
};

/// Squared Euclidean distance with a fixed summation order, so every caller
/// gets bit-identical values for the same pair of rows.
inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    Eigen::Index j = 0;
    for (; j + 4 <= d; j += 4) {
        const double d0 = a[j] - b[j];
        const double d1 = a[j + 1] - b[j + 1];
        const double d2 = a[j + 2] - b[j + 2];
        const double d3 = a[j + 3] - b[j + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; j < d; ++j) {
        const double dj = a[j] - b[j];
        s0 += dj * dj;
    }
    return (s0 + s1) + (s2 + s3);
}

/// (distance, training index) pairs of the k nearest training rows, nearest
/// first; equal distances are ordered by index. `exclude` (if >= 0) is skipped.
std::vector<std::pair<double, Eigen::Index>> knn_neighbors(const KnnState& state, const double* query, int k,
                                                           Eigen::Index exclude = -1);

KnnState fit_knn(const KnnParams& params, const Matrix& x, const Labels& y);

/// Neighbor vote fractions.
Matrix knn_votes(const KnnState& state, const Matrix& x, int n_classes);

}  // namespace oop

#endif  // OOP_MODELS_KNN_HPP
