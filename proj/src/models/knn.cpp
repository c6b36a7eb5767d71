#include "oop/models/knn.hpp"

#include <algorithm>
#include <cmath>

namespace oop {

std::vector<std::pair<double, Eigen::Index>> knn_neighbors(const KnnState& state, const double* query, int k,
                                                           Eigen::Index exclude) {
    const Eigen::Index n = state.points.rows();
    const Eigen::Index d = state.points.cols();
    std::vector<std::pair<double, Eigen::Index>> all;
    all.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == exclude) continue;
        all.emplace_back(squared_distance(query, state.points.row(i).data(), d), i);
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end());
    all.resize(take);
    for (auto& p : all) p.first = std::sqrt(p.first);
    return all;
}

KnnState fit_knn(const KnnParams& params, const Matrix& x, const Labels& y) {
    KnnState state;
    state.points = x;
    state.labels = y;
    state.k = params.k;
    return state;
}

Matrix knn_votes(const KnnState& state, const Matrix& x, int n_classes) {
    Matrix votes = Matrix::Zero(x.rows(), n_classes);
    const RowMatrix queries = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto nn = knn_neighbors(state, queries.row(i).data(), state.k);
        for (const auto& [dist, idx] : nn) votes(i, state.labels(idx)) += 1.0;
        votes.row(i) /= static_cast<double>(nn.size());
    }
    return votes;
}

}  // namespace oop
