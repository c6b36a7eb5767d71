#ifndef OOP_STATS_HPP
#define OOP_STATS_HPP

#include "oop/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oop::stats {

/// 1-based ranks with ties replaced by their average rank.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> average_ranks(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && x(order[j + 1]) == x(order[i])) ++j;
        const Scalar avg = static_cast<Scalar>(i + j) / Scalar(2) + Scalar(1);
        for (Eigen::Index k = i; k <= j; ++k) ranks(order[k]) = avg;
        i = j + 1;
    }
    return ranks;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    const auto ca = (a.array() - a.mean()).matrix().eval();
    const auto cb = (b.array() - b.mean()).matrix().eval();
    const Scalar denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (denom == Scalar(0)) return Scalar(0);
    return std::clamp(ca.dot(cb) / denom, Scalar(-1), Scalar(1));
}

/// Spearman rank correlation (Pearson on average ranks).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar spearman(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of a Student t statistic with `dof` degrees of freedom.
inline double student_t_two_sided(double t, double dof) {
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

/// p-value of a correlation coefficient via the t approximation at sample size n.
inline double correlation_p_value(double r, Eigen::Index n) {
    const double dof = static_cast<double>(n - 2);
    if (dof <= 0.0) return 1.0;
    if (std::abs(r) >= 1.0) return 0.0;
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    return student_t_two_sided(t, dof);
}

/// Population variance (divides by n).
template <typename Derived>
double population_variance(const Eigen::DenseBase<Derived>& v) {
    if (v.size() == 0) return 0.0;
    const auto x = v.template cast<double>().eval();
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size());
}

}  // namespace oop::stats

#endif  // OOP_STATS_HPP
