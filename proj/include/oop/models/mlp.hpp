#ifndef OOP_MODELS_MLP_HPP
#define OOP_MODELS_MLP_HPP

#include "oop/common.hpp"

#include <cstdint>
#include <vector>

namespace oop {

/// One hidden ReLU layer, softmax output, Adam on mini-batches.
struct MlpParams {
    int hidden = 100;
    int max_epochs = 200;
    int batch_size = 200;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2 = 1e-4;
    // Stop once the epoch loss fails to improve on the best by `tol` for `patience` epochs.
    double tol = 1e-4;
    int patience = 10;
};

struct MlpState {
    Matrix w1;  // n_features x hidden
    Vector b1;
    Matrix w2;  // hidden x n_classes
    Vector b2;
    std::vector<double> loss_curve;
};

MlpState fit_mlp(const MlpParams& params, const Matrix& x, const Labels& y, int n_classes, std::uint64_t seed);

/// Pre-softmax activations.
Matrix mlp_logits(const MlpState& state, const Matrix& x);

Matrix softmax_rows(const Matrix& logits);

}  // namespace oop

#endif  // OOP_MODELS_MLP_HPP
