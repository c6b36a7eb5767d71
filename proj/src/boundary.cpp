#include "oop/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oop {

namespace {

Vector predicted_class_magnitude(const Matrix& scores) {
    Vector out(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) out(i) = std::abs(scores(i, argmax_first(scores.row(i))));
    return out;
}

Vector knn_distances(const KnnState& state, const Matrix& x) {
    const RowMatrix rows = x;
    // Self-exclusion only makes sense when the model stores exactly these rows.
    const bool same_rows = state.points.rows() == rows.rows() && state.points == rows;
    Vector out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const auto nn = knn_neighbors(state, rows.row(i).data(), state.k, same_rows ? i : -1);
        out(i) = nn.empty() ? 0.0 : nn.back().first;
    }
    return out;
}

Vector gnb_distances(const GnbParams& params, const Dataset& train_set) {
    const auto halves = alternating_halves(train_set.labels, train_set.n_classes);
    if (halves[0].empty() || halves[1].empty())
        throw DataError("GNB distance needs at least two training rows");
    Vector out(train_set.rows());
    for (int h = 0; h < 2; ++h) {
        const Dataset fit_half = train_set.subset(halves[static_cast<std::size_t>(h)]);
        const auto& score_rows = halves[static_cast<std::size_t>(1 - h)];
        const Dataset score_half = train_set.subset(score_rows);
        const GnbState state = fit_gnb(params, fit_half.features, fit_half.labels, train_set.n_classes);
        const Matrix log_proba = gnb_log_proba(state, score_half.features);
        for (std::size_t r = 0; r < score_rows.size(); ++r)
            out(score_rows[r]) = log_proba.row(static_cast<Eigen::Index>(r)).maxCoeff();
    }
    return out.array() - out.minCoeff();
}

}  // namespace

std::array<std::vector<Eigen::Index>, 2> alternating_halves(const Labels& labels, int n_classes) {
    std::array<std::vector<Eigen::Index>, 2> halves;
    std::vector<int> seen(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        int& count = seen[static_cast<std::size_t>(labels(i))];
        halves[static_cast<std::size_t>(count % 2)].push_back(i);
        ++count;
    }
    return halves;
}

DistanceReport compute_distances(const TrainedModel& model, const Dataset& train_set) {
    validate_schema(train_set);
    if (train_set.cols() != model.n_features() || train_set.n_classes != model.n_classes())
        throw ModelError("training set schema does not match the model");

    DistanceReport report;
    report.dataset = train_set.name;
    report.family = model.family();
    const Matrix& x = train_set.features;
    switch (model.family()) {
        case Family::svm:
        case Family::mlp: report.distances = predicted_class_magnitude(decision_scores(model, x)); break;
        case Family::dt: report.distances = tree_leaf_depths(model.state_as<TreeState>(), x); break;
        case Family::rf: report.distances = forest_leaf_depths(model.state_as<ForestState>(), x); break;
        case Family::knn: report.distances = knn_distances(model.state_as<KnnState>(), x); break;
        case Family::gnb:
            report.distances = gnb_distances(std::get<GnbParams>(model.config().params), train_set);
            break;
    }
    if (!report.distances.allFinite()) throw ModelError("non-finite boundary distance");
    return report;
}

std::vector<Eigen::Index> top_outliers(const DistanceReport& report, Eigen::Index count) {
    const Eigen::Index n = report.size();
    if (count < 0 || count > n)
        throw DataError("requested " + std::to_string(count) + " outliers from " + std::to_string(n) + " rows");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Vector& d = report.distances;
    std::partial_sort(order.begin(), order.begin() + count, order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return d(a) != d(b) ? d(a) > d(b) : a < b;
    });
    order.resize(static_cast<std::size_t>(count));
    return order;
}

double svm_margin_score(const TrainedModel& model) {
    if (model.family() != Family::svm)
        throw ModelError("margin score is defined for SVM only, not " + std::string(to_string(model.family())));
    return svm_min_margin(model.state_as<SvmState>());
}

double boundary_disagreement(const TrainedModel& clean, const TrainedModel& poisoned, const Dataset& probe) {
    if (probe.rows() == 0) throw DataError("empty probe set");
    const Labels a = predict(clean, probe.features);
    const Labels b = predict(poisoned, probe.features);
    return static_cast<double>((a.array() != b.array()).count()) / static_cast<double>(probe.rows());
}

}  // namespace oop
