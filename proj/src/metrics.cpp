#include "oop/metrics.hpp"

#include "oop/stats.hpp"

#include <algorithm>

namespace oop {

namespace {

double ratio(long num, long den, bool& degenerate) {
    degenerate = den == 0;
    return degenerate ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion(const Labels& truth, const Labels& predicted, int n_classes) {
    if (truth.size() != predicted.size())
        throw DataError("label sequences differ in length: " + std::to_string(truth.size()) + " vs " +
                        std::to_string(predicted.size()));
    if (n_classes < 1) throw DataError("confusion matrix needs at least one class");
    ConfusionMatrix cm{n_classes, Eigen::MatrixXi::Zero(n_classes, n_classes)};
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth(i) < 0 || truth(i) >= n_classes || predicted(i) < 0 || predicted(i) >= n_classes)
            throw DataError("label out of range at position " + std::to_string(i));
        ++cm.counts(truth(i), predicted(i));
    }
    return cm;
}

bool MetricsReport::degenerate() const {
    return std::any_of(per_class.begin(), per_class.end(), [](const ClassMetrics& c) {
        return c.precision_degenerate || c.recall_degenerate || c.fpr_degenerate;
    });
}

MetricsReport metrics_bundle(const ConfusionMatrix& cm, const Labels& predicted) {
    const long total = cm.total();
    if (predicted.size() != total) throw DataError("prediction count does not match the confusion matrix");
    MetricsReport r;
    if (total == 0) return r;
    const int k = cm.n_classes;
    r.per_class.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const long tp = cm.counts(c, c);
        const long fp = cm.counts.col(c).sum() - tp;
        const long fn = cm.counts.row(c).sum() - tp;
        const long tn = total - tp - fp - fn;
        auto& m = r.per_class[static_cast<std::size_t>(c)];
        m.precision = ratio(tp, tp + fp, m.precision_degenerate);
        m.recall = ratio(tp, tp + fn, m.recall_degenerate);
        m.fpr = ratio(fp, fp + tn, m.fpr_degenerate);
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_fpr += m.fpr;
    }
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_fpr /= k;
    const double pr = r.macro_precision + r.macro_recall;
    r.macro_f1 = pr > 0.0 ? 2.0 * r.macro_precision * r.macro_recall / pr : 0.0;
    r.accuracy = static_cast<double>(cm.counts.trace()) / static_cast<double>(total);
    r.correct_classification_rate = r.accuracy;
    r.variance = stats::population_variance(predicted.cast<double>());
    return r;
}

Degradation degradation(const MetricsReport& clean, const MetricsReport& poisoned) {
    Degradation d;
    d.lambda = (clean.accuracy - poisoned.accuracy) * 100.0;
    d.asr = d.lambda;
    d.fpr_increase = poisoned.macro_fpr - clean.macro_fpr;
    return d;
}

}  // namespace oop
