#ifndef OOP_MODELS_GNB_HPP
#define OOP_MODELS_GNB_HPP

#include "oop/common.hpp"

namespace oop {

struct GnbParams {
    double var_smoothing = 1e-9;
};

/// Per-class Gaussian parameters. A class absent from the training rows gets
/// prior 0 (log prior -inf) and is never predicted.
struct GnbState {
    Matrix means;  // n_classes x n_features
    Matrix variances;  // n_classes x n_features, epsilon included
    Vector priors;
    Vector class_count;
    double epsilon = 0.0;
};

GnbState fit_gnb(const GnbParams& params, const Matrix& x, const Labels& y, int n_classes);

/// Joint log-likelihood log P(c) + log P(x | c), rows x n_classes.
Matrix gnb_joint_log_likelihood(const GnbState& state, const Matrix& x);

/// Normalized log posteriors (log-sum-exp over classes).
Matrix gnb_log_proba(const GnbState& state, const Matrix& x);

}  // namespace oop

#endif  // OOP_MODELS_GNB_HPP
