#ifndef OOP_MODELS_SVM_HPP
#define OOP_MODELS_SVM_HPP

#include "oop/common.hpp"

#include <vector>

namespace oop {

struct SvmParams {
    int degree = 3;
    double C = 3.0;
    // Kernel is (gamma * <x, y> + coef0)^degree; gamma <= 0 selects 1 / (n_features * Var(X)).
    double gamma = 0.0;
    double coef0 = 0.0;
    double tolerance = 1e-3;
    long max_iter = 0;  // 0: max(10^7, 100 n)
    bool record_objective = false;
};

/// One binary subproblem (class c against the rest).
struct BinarySvm {
    Vector coef;  // y_i * alpha_i, aligned to SvmState::support rows (zero for non-members)
    double rho = 0.0;
    double w_norm_sq = 0.0;  // ||w||^2 in kernel space
    long iterations = 0;
    double kkt_gap = 0.0;  // m(alpha) - M(alpha) at termination
    Vector alpha;  // full dual vector over the training rows
    std::vector<double> objective;  // dual objective per iteration, when recorded
};

struct SvmState {
    Matrix support;  // union of support vectors across subproblems
    std::vector<Eigen::Index> support_rows;  // their training-row indices
    std::vector<BinarySvm> machines;
    double gamma = 1.0;
    double coef0 = 0.0;
    int degree = 3;
};

double resolve_gamma(const SvmParams& params, const Matrix& x);

/// Polynomial kernel matrix between the rows of `a` and `b`.
Matrix poly_kernel(const Matrix& a, const Matrix& b, double gamma, double coef0, int degree);

struct SmoResult {
    Vector alpha;
    double rho = 0.0;
    long iterations = 0;
    double kkt_gap = 0.0;
    std::vector<double> objective;
};

/// LIBSVM-style SMO with second-order working-set selection on a precomputed
/// kernel. Maximizes sum(alpha) - 1/2 alpha' Q alpha, 0 <= alpha <= C, y'alpha = 0.
/// Throws SolverError when the iteration cap is reached first.
SmoResult solve_smo(const Matrix& kernel, const Eigen::VectorXd& y, double C, double tolerance, long max_iter,
                    bool record_objective);

SvmState fit_svm(const SvmParams& params, const Matrix& x, const Labels& y, int n_classes);

/// Signed one-vs-rest decision values, rows x n_classes.
Matrix svm_decision(const SvmState& state, const Matrix& x);

/// Smallest geometric margin 1 / ||w|| over the subproblems.
double svm_min_margin(const SvmState& state);

}  // namespace oop

#endif  // OOP_MODELS_SVM_HPP
