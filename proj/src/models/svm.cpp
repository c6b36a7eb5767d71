#include "oop/models/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace oop {

namespace {

constexpr double tau = 1e-12;

}  // namespace

double resolve_gamma(const SvmParams& params, const Matrix& x) {
    if (params.gamma > 0.0) return params.gamma;
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    if (!(var > 0.0)) return 1.0;
    return 1.0 / (static_cast<double>(x.cols()) * var);
}

Matrix poly_kernel(const Matrix& a, const Matrix& b, double gamma, double coef0, int degree) {
    Matrix k = a * b.transpose();
    k.array() = (gamma * k.array() + coef0).pow(static_cast<double>(degree));
    return k;
}

SmoResult solve_smo(const Matrix& kernel, const Eigen::VectorXd& y, double C, double tolerance, long max_iter,
                    bool record_objective) {
    const Eigen::Index n = y.size();
    SmoResult out;
    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);  // gradient of 1/2 a'Qa - e'a
    const Vector qd = kernel.diagonal();

    auto is_upper = [&](Eigen::Index t) { return alpha(t) >= C; };
    auto is_lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };
    auto dual_objective = [&] {
        // -(1/2 a'Qa - e'a) = -1/2 sum a_i (G_i - 1)
        return -0.5 * alpha.dot((grad.array() - 1.0).matrix());
    };
    if (record_objective) out.objective.push_back(dual_objective());

    long iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
        // Maximal violating i, then second-order choice of j.
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (!is_upper(t) && -grad(t) >= gmax) {
                    gmax = -grad(t);
                    i = t;
                }
            } else if (!is_lower(t) && grad(t) >= gmax) {
                gmax = grad(t);
                i = t;
            }
        }
        Eigen::Index j = -1;
        double obj_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (!is_lower(t)) {
                    const double grad_diff = gmax + grad(t);
                    if (grad(t) >= gmax2) gmax2 = grad(t);
                    if (i >= 0 && grad_diff > 0) {
                        double quad = qd(i) + qd(t) - 2.0 * kernel(i, t);
                        if (quad <= 0) quad = tau;
                        const double obj_diff = -(grad_diff * grad_diff) / quad;
                        if (obj_diff <= obj_min) {
                            j = t;
                            obj_min = obj_diff;
                        }
                    }
                }
            } else if (!is_upper(t)) {
                const double grad_diff = gmax - grad(t);
                if (-grad(t) >= gmax2) gmax2 = -grad(t);
                if (i >= 0 && grad_diff > 0) {
                    double quad = qd(i) + qd(t) - 2.0 * kernel(i, t);
                    if (quad <= 0) quad = tau;
                    const double obj_diff = -(grad_diff * grad_diff) / quad;
                    if (obj_diff <= obj_min) {
                        j = t;
                        obj_min = obj_diff;
                    }
                }
            }
        }
        gap = gmax + gmax2;
        if (gap < tolerance || j == -1 || i == -1) break;
        if (iter >= max_iter)
            throw SolverError("SMO did not converge within " + std::to_string(max_iter) +
                              " iterations (KKT gap " + std::to_string(gap) + ")");
        ++iter;

        // Q_ij = y_i y_j K_ij
        const double qij = y(i) * y(j) * kernel(i, j);
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);
        double ai = old_ai;
        double aj = old_aj;
        if (y(i) != y(j)) {
            double quad = qd(i) + qd(j) + 2.0 * qij;
            if (quad <= 0) quad = tau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) {
                    aj = 0;
                    ai = diff;
                }
            } else if (ai < 0) {
                ai = 0;
                aj = -diff;
            }
            if (diff > 0) {
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else if (aj > C) {
                aj = C;
                ai = C + diff;
            }
        } else {
            double quad = qd(i) + qd(j) - 2.0 * qij;
            if (quad <= 0) quad = tau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
            } else if (aj < 0) {
                aj = 0;
                ai = sum;
            }
            if (sum > C) {
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else if (ai < 0) {
                ai = 0;
                aj = sum;
            }
        }
        alpha(i) = ai;
        alpha(j) = aj;
        const double dai = ai - old_ai;
        const double daj = aj - old_aj;
        // G_t += Q_ti dai + Q_tj daj
        grad.array() += (y.array() * kernel.col(i).array()) * (y(i) * dai) +
                        (y.array() * kernel.col(j).array()) * (y(j) * daj);
        if (record_objective) out.objective.push_back(dual_objective());
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    Eigen::Index n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y(t) * grad(t);
        if (is_upper(t)) {
            if (y(t) < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (is_lower(t)) {
            if (y(t) > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    out.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    out.alpha = std::move(alpha);
    out.iterations = iter;
    out.kkt_gap = gap;
    return out;
}

SvmState fit_svm(const SvmParams& params, const Matrix& x, const Labels& y, int n_classes) {
    const Eigen::Index n = x.rows();
    SvmState state;
    state.gamma = resolve_gamma(params, x);
    state.coef0 = params.coef0;
    state.degree = params.degree;
    const long max_iter = params.max_iter > 0 ? params.max_iter : std::max<long>(10'000'000L, 100L * static_cast<long>(n));

    const Matrix kernel = poly_kernel(x, x, state.gamma, state.coef0, state.degree);
    std::vector<SmoResult> results;
    std::vector<char> is_support(static_cast<std::size_t>(n), 0);
    for (int c = 0; c < n_classes; ++c) {
        Vector target(n);
        for (Eigen::Index i = 0; i < n; ++i) target(i) = y(i) == c ? 1.0 : -1.0;
        results.push_back(solve_smo(kernel, target, params.C, params.tolerance, max_iter, params.record_objective));
        const Vector& a = results.back().alpha;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (a(i) > 0.0) is_support[static_cast<std::size_t>(i)] = 1;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (is_support[static_cast<std::size_t>(i)]) state.support_rows.push_back(i);
    }
    const auto n_sv = static_cast<Eigen::Index>(state.support_rows.size());
    state.support.resize(n_sv, x.cols());
    for (Eigen::Index s = 0; s < n_sv; ++s) state.support.row(s) = x.row(state.support_rows[static_cast<std::size_t>(s)]);

    Matrix k_ss(n_sv, n_sv);
    for (Eigen::Index a = 0; a < n_sv; ++a) {
        for (Eigen::Index b = 0; b < n_sv; ++b)
            k_ss(a, b) = kernel(state.support_rows[static_cast<std::size_t>(a)], state.support_rows[static_cast<std::size_t>(b)]);
    }
    for (int c = 0; c < n_classes; ++c) {
        SmoResult& r = results[static_cast<std::size_t>(c)];
        BinarySvm m;
        m.coef = Vector::Zero(n_sv);
        for (Eigen::Index s = 0; s < n_sv; ++s) {
            const Eigen::Index row = state.support_rows[static_cast<std::size_t>(s)];
            m.coef(s) = (y(row) == c ? 1.0 : -1.0) * r.alpha(row);
        }
        m.rho = r.rho;
        m.w_norm_sq = m.coef.dot(k_ss * m.coef);
        m.iterations = r.iterations;
        m.kkt_gap = r.kkt_gap;
        m.alpha = std::move(r.alpha);
        m.objective = std::move(r.objective);
        state.machines.push_back(std::move(m));
    }
    return state;
}

Matrix svm_decision(const SvmState& state, const Matrix& x) {
    const auto n_classes = static_cast<Eigen::Index>(state.machines.size());
    Matrix coef(state.support.rows(), n_classes);
    Vector rho(n_classes);
    for (Eigen::Index c = 0; c < n_classes; ++c) {
        coef.col(c) = state.machines[static_cast<std::size_t>(c)].coef;
        rho(c) = state.machines[static_cast<std::size_t>(c)].rho;
    }
    if (state.support.rows() == 0) return (-rho.transpose()).replicate(x.rows(), 1);
    const Matrix k = poly_kernel(x, state.support, state.gamma, state.coef0, state.degree);
    Matrix scores = k * coef;
    scores.rowwise() -= rho.transpose();
    return scores;
}

double svm_min_margin(const SvmState& state) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : state.machines) {
        if (m.w_norm_sq > 0.0) best = std::min(best, 1.0 / std::sqrt(m.w_norm_sq));
    }
    return std::isfinite(best) ? best : 0.0;
}

}  // namespace oop
