#include "oop/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace oop {

namespace {

struct Adam {
    Matrix m_w1, v_w1, m_w2, v_w2;
    Vector m_b1, v_b1, m_b2, v_b2;
    long step = 0;
};

template <typename P, typename G>
void adam_update(P& param, const G& grad, P& m, P& v, const MlpParams& p, double lr_t) {
    m = p.beta1 * m + (1.0 - p.beta1) * grad;
    v.array() = p.beta2 * v.array() + (1.0 - p.beta2) * grad.array().square();
    param.array() -= lr_t * m.array() / (v.array().sqrt() + p.epsilon);
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
    Matrix out = logits;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double top = out.row(i).maxCoeff();
        out.row(i) = (out.row(i).array() - top).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

Matrix mlp_logits(const MlpState& state, const Matrix& x) {
    Matrix h = (x * state.w1).rowwise() + state.b1.transpose();
    h = h.cwiseMax(0.0);
    return (h * state.w2).rowwise() + state.b2.transpose();
}

MlpState fit_mlp(const MlpParams& params, const Matrix& x, const Labels& y, int n_classes, std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index h = params.hidden;
    std::mt19937_64 rng(seed);

    // Glorot-uniform weights, zero biases.
    MlpState s;
    auto glorot = [&](Eigen::Index fan_in, Eigen::Index fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        Matrix w(fan_in, fan_out);
        for (Eigen::Index j = 0; j < fan_out; ++j) {
            for (Eigen::Index i = 0; i < fan_in; ++i) w(i, j) = u(rng);
        }
        return w;
    };
    s.w1 = glorot(d, h);
    s.b1 = Vector::Zero(h);
    s.w2 = glorot(h, n_classes);
    s.b2 = Vector::Zero(n_classes);

    Adam adam;
    adam.m_w1 = adam.v_w1 = Matrix::Zero(d, h);
    adam.m_w2 = adam.v_w2 = Matrix::Zero(h, n_classes);
    adam.m_b1 = adam.v_b1 = Vector::Zero(h);
    adam.m_b2 = adam.v_b2 = Vector::Zero(n_classes);

    const Eigen::Index batch = std::clamp<Eigen::Index>(params.batch_size, 1, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    double best_loss = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index b = std::min(batch, n - start);
            Matrix xb(b, d);
            Matrix target = Matrix::Zero(b, n_classes);
            for (Eigen::Index r = 0; r < b; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
                xb.row(r) = x.row(src);
                target(r, y(src)) = 1.0;
            }

            const Matrix pre = (xb * s.w1).rowwise() + s.b1.transpose();
            const Matrix act = pre.cwiseMax(0.0);
            const Matrix logits = (act * s.w2).rowwise() + s.b2.transpose();
            const Matrix prob = softmax_rows(logits);

            const double bd = static_cast<double>(b);
            double ce = 0.0;
            for (Eigen::Index r = 0; r < b; ++r) ce -= std::log(std::max(prob(r, y(order[static_cast<std::size_t>(start + r)])), 1e-300));
            const double penalty = 0.5 * params.l2 * (s.w1.squaredNorm() + s.w2.squaredNorm());
            epoch_loss += ce + penalty;

            const Matrix d_logits = (prob - target) / bd;
            const Matrix g_w2 = act.transpose() * d_logits + (params.l2 / bd) * s.w2;
            const Vector g_b2 = d_logits.colwise().sum().transpose();
            const Matrix d_act = (d_logits * s.w2.transpose()).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
            const Matrix g_w1 = xb.transpose() * d_act + (params.l2 / bd) * s.w1;
            const Vector g_b1 = d_act.colwise().sum().transpose();

            ++adam.step;
            const double t = static_cast<double>(adam.step);
            const double lr_t = params.learning_rate * std::sqrt(1.0 - std::pow(params.beta2, t)) /
                                (1.0 - std::pow(params.beta1, t));
            adam_update(s.w1, g_w1, adam.m_w1, adam.v_w1, params, lr_t);
            adam_update(s.b1, g_b1, adam.m_b1, adam.v_b1, params, lr_t);
            adam_update(s.w2, g_w2, adam.m_w2, adam.v_w2, params, lr_t);
            adam_update(s.b2, g_b2, adam.m_b2, adam.v_b2, params, lr_t);
        }
        epoch_loss /= static_cast<double>(n);
        s.loss_curve.push_back(epoch_loss);

        if (epoch_loss > best_loss - params.tol) {
            ++stale;
        } else {
            stale = 0;
        }
        best_loss = std::min(best_loss, epoch_loss);
        if (stale >= params.patience) break;
    }
    return s;
}

}  // namespace oop
