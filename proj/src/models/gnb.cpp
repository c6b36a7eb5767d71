#include "oop/models/gnb.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace oop {

GnbState fit_gnb(const GnbParams& params, const Matrix& x, const Labels& y, int n_classes) {
    const Eigen::Index d = x.cols();
    const double n = static_cast<double>(x.rows());
    GnbState s;
    s.means = Matrix::Zero(n_classes, d);
    s.variances = Matrix::Zero(n_classes, d);
    s.class_count = Vector::Zero(n_classes);

    const Eigen::RowVectorXd overall_mean = x.colwise().mean();
    const double max_var = (x.rowwise() - overall_mean).array().square().colwise().mean().maxCoeff();
    s.epsilon = params.var_smoothing * (max_var > 0.0 ? max_var : 1.0);

    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        s.means.row(y(i)) += x.row(i);
        s.class_count(y(i)) += 1.0;
    }
    for (int c = 0; c < n_classes; ++c) {
        if (s.class_count(c) > 0.0) s.means.row(c) /= s.class_count(c);
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        s.variances.row(y(i)).array() += (x.row(i) - s.means.row(y(i))).array().square();
    for (int c = 0; c < n_classes; ++c) {
        if (s.class_count(c) > 0.0) s.variances.row(c) /= s.class_count(c);
    }
    s.variances.array() += s.epsilon;
    s.priors = s.class_count / n;
    return s;
}

Matrix gnb_joint_log_likelihood(const GnbState& state, const Matrix& x) {
    const auto n_classes = state.means.rows();
    Matrix jll(x.rows(), n_classes);
    for (Eigen::Index c = 0; c < n_classes; ++c) {
        if (state.priors(c) <= 0.0) {
            jll.col(c).setConstant(-std::numeric_limits<double>::infinity());
            continue;
        }
        const auto var = state.variances.row(c).array();
        const double norm = -0.5 * (2.0 * std::numbers::pi * var).log().sum();
        const Vector quad =
            ((x.rowwise() - state.means.row(c)).array().square().rowwise() / var).rowwise().sum();
        jll.col(c) = (std::log(state.priors(c)) + norm - 0.5 * quad.array()).matrix();
    }
    return jll;
}

Matrix gnb_log_proba(const GnbState& state, const Matrix& x) {
    Matrix jll = gnb_joint_log_likelihood(state, x);
    for (Eigen::Index i = 0; i < jll.rows(); ++i) {
        const double top = jll.row(i).maxCoeff();
        const double lse = top + std::log((jll.row(i).array() - top).exp().sum());
        jll.row(i).array() -= lse;
    }
    return jll;
}

}  // namespace oop
