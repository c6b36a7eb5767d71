#ifndef OOP_METRICS_HPP
#define OOP_METRICS_HPP

#include "oop/common.hpp"

#include <vector>

namespace oop {

/// counts(i, j): rows of true class i predicted as class j.
struct ConfusionMatrix {
    int n_classes = 0;
    Eigen::MatrixXi counts;

    long total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const Labels& truth, const Labels& predicted, int n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double fpr = 0.0;
    // Set when the matching denominator was zero; the metric then reads 0.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool fpr_degenerate = false;
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;  // harmonic mean of macro precision and macro recall
    double macro_fpr = 0.0;
    double variance = 0.0;  // population variance of the predicted class indices
    double correct_classification_rate = 0.0;
    std::vector<ClassMetrics> per_class;

    bool degenerate() const;
};

/// One-vs-rest per-class metrics with unweighted macro averages.
MetricsReport metrics_bundle(const ConfusionMatrix& cm, const Labels& predicted);

struct Degradation {
    double lambda = 0.0;  // accuracy drop in percentage points
    double asr = 0.0;  // attack success rate, reported as the same point drop
    double fpr_increase = 0.0;
};

Degradation degradation(const MetricsReport& clean, const MetricsReport& poisoned);

}  // namespace oop

#endif  // OOP_METRICS_HPP
