#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isilab/errors.hpp"
#include "isilab/rng.hpp"

namespace isilab {

// Scalar-input state classifier: 1 -> h1 (sigmoid) -> h2 (ReLU) -> classes
// (softmax). Class indices coincide with trellis state indices.
struct MlpParams {
    int hidden1 = 0;
    int hidden2 = 0;
    int classes = 0;
    std::vector<double> w1, b1;  // h1 x 1, h1
    std::vector<double> w2, b2;  // h2 x h1, h2
    std::vector<double> w3, b3;  // classes x h2, classes

    MlpParams() = default;
    MlpParams(int h1, int h2, int num_classes)
        : hidden1(h1), hidden2(h2), classes(num_classes),
          w1(static_cast<std::size_t>(h1), 0.0), b1(static_cast<std::size_t>(h1), 0.0),
          w2(static_cast<std::size_t>(h2) * h1, 0.0), b2(static_cast<std::size_t>(h2), 0.0),
          w3(static_cast<std::size_t>(num_classes) * h2, 0.0),
          b3(static_cast<std::size_t>(num_classes), 0.0) {
        if (h1 < 1 || h2 < 1 || num_classes < 2)
            throw InvalidParameter("MlpParams: bad layer sizes");
    }

    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }
};

// Labeled scalar samples; labels are state indices in [0, num_classes).
struct TrainingSet {
    std::vector<double> inputs;
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return inputs.size(); }
};

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 0.01;
    int batch_size = 128;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline void glorot_init(MlpParams& p, rng::Stream& rng) {
    auto fill = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : w) v = rng.next_uniform(-limit, limit);
    };
    fill(p.w1, 1, p.hidden1);
    fill(p.w2, p.hidden1, p.hidden2);
    fill(p.w3, p.hidden2, p.classes);
    // biases stay zero
}

namespace detail {

struct MlpWorkspace {
    std::vector<double> z1, a1, z2, a2, z3, probs;
    std::vector<double> dz3, dz2, dz1;

    explicit MlpWorkspace(const MlpParams& p)
        : z1(p.w1.size()), a1(p.w1.size()), z2(p.b2.size()), a2(p.b2.size()),
          z3(p.b3.size()), probs(p.b3.size()), dz3(p.b3.size()), dz2(p.b2.size()),
          dz1(p.b1.size()) {}
};

inline void forward_into(const MlpParams& p, double y, MlpWorkspace& ws) {
    const int h1 = p.hidden1, h2 = p.hidden2, c = p.classes;
    for (int i = 0; i < h1; ++i) {
        double z = p.w1[static_cast<std::size_t>(i)] * y + p.b1[static_cast<std::size_t>(i)];
        ws.z1[static_cast<std::size_t>(i)] = z;
        ws.a1[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-z));
    }
    for (int j = 0; j < h2; ++j) {
        const double* w = p.w2.data() + static_cast<std::size_t>(j) * h1;
        double z = p.b2[static_cast<std::size_t>(j)];
        for (int i = 0; i < h1; ++i) z += w[i] * ws.a1[static_cast<std::size_t>(i)];
        ws.z2[static_cast<std::size_t>(j)] = z;
        ws.a2[static_cast<std::size_t>(j)] = z > 0.0 ? z : 0.0;
    }
    double zmax = -1e300;
    for (int k = 0; k < c; ++k) {
        const double* w = p.w3.data() + static_cast<std::size_t>(k) * h2;
        double z = p.b3[static_cast<std::size_t>(k)];
        for (int j = 0; j < h2; ++j) z += w[j] * ws.a2[static_cast<std::size_t>(j)];
        ws.z3[static_cast<std::size_t>(k)] = z;
        zmax = std::max(zmax, z);
    }
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
        double e = std::exp(ws.z3[static_cast<std::size_t>(k)] - zmax);
        ws.probs[static_cast<std::size_t>(k)] = e;
        sum += e;
    }
    double inv = 1.0 / sum;
    for (int k = 0; k < c; ++k) ws.probs[static_cast<std::size_t>(k)] *= inv;
}

// log p(label | y) from the workspace filled by forward_into.
inline double log_prob(const MlpWorkspace& ws, int label) {
    double zmax = *std::max_element(ws.z3.begin(), ws.z3.end());
    double lse = 0.0;
    for (double z : ws.z3) lse += std::exp(z - zmax);
    return ws.z3[static_cast<std::size_t>(label)] - zmax - std::log(lse);
}

}  // namespace detail

// Posterior class probabilities for a single received sample.
inline std::vector<double> mlp_forward(const MlpParams& p, double y) {
    if (!std::isfinite(y)) throw InvalidParameter("mlp_forward: non-finite input");
    detail::MlpWorkspace ws(p);
    detail::forward_into(p, y, ws);
    for (double v : ws.probs)
        if (!std::isfinite(v)) throw NumericalDegeneracy("mlp_forward: non-finite output");
    return ws.probs;
}

// d probs / d y, for checking the forward chain against finite differences.
inline std::vector<double> mlp_input_gradient(const MlpParams& p, double y) {
    detail::MlpWorkspace ws(p);
    detail::forward_into(p, y, ws);
    const int h1 = p.hidden1, h2 = p.hidden2, c = p.classes;
    std::vector<double> v1(static_cast<std::size_t>(h1));
    for (int i = 0; i < h1; ++i) {
        double a = ws.a1[static_cast<std::size_t>(i)];
        v1[static_cast<std::size_t>(i)] = p.w1[static_cast<std::size_t>(i)] * a * (1.0 - a);
    }
    std::vector<double> v2(static_cast<std::size_t>(h2));
    for (int j = 0; j < h2; ++j) {
        if (ws.z2[static_cast<std::size_t>(j)] <= 0.0) {
            v2[static_cast<std::size_t>(j)] = 0.0;
            continue;
        }
        const double* w = p.w2.data() + static_cast<std::size_t>(j) * h1;
        double acc = 0.0;
        for (int i = 0; i < h1; ++i) acc += w[i] * v1[static_cast<std::size_t>(i)];
        v2[static_cast<std::size_t>(j)] = acc;
    }
    std::vector<double> v3(static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k) {
        const double* w = p.w3.data() + static_cast<std::size_t>(k) * h2;
        double acc = 0.0;
        for (int j = 0; j < h2; ++j) acc += w[j] * v2[static_cast<std::size_t>(j)];
        v3[static_cast<std::size_t>(k)] = acc;
    }
    double dot = 0.0;
    for (int k = 0; k < c; ++k) dot += ws.probs[static_cast<std::size_t>(k)] * v3[static_cast<std::size_t>(k)];
    std::vector<double> grad(static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k)
        grad[static_cast<std::size_t>(k)] =
            ws.probs[static_cast<std::size_t>(k)] * (v3[static_cast<std::size_t>(k)] - dot);
    return grad;
}

// Mean cross-entropy over a dataset.
inline double cross_entropy_loss(const MlpParams& p, const TrainingSet& data) {
    if (data.size() == 0) throw InvalidParameter("cross_entropy_loss: empty dataset");
    detail::MlpWorkspace ws(p);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        detail::forward_into(p, data.inputs[i], ws);
        total -= detail::log_prob(ws, data.labels[i]);
    }
    return total / static_cast<double>(data.size());
}

// Mean loss and mean parameter gradients over (inputs, labels); gradient
// buffers must be shaped like `p` and are overwritten.
inline double loss_and_gradients(const MlpParams& p, std::span<const double> inputs,
                                 std::span<const int> labels, MlpParams& grad) {
    const int h1 = p.hidden1, h2 = p.hidden2, c = p.classes;
    const std::size_t n = inputs.size();
    if (n == 0) throw InvalidParameter("loss_and_gradients: empty batch");
    std::fill(grad.w1.begin(), grad.w1.end(), 0.0);
    std::fill(grad.b1.begin(), grad.b1.end(), 0.0);
    std::fill(grad.w2.begin(), grad.w2.end(), 0.0);
    std::fill(grad.b2.begin(), grad.b2.end(), 0.0);
    std::fill(grad.w3.begin(), grad.w3.end(), 0.0);
    std::fill(grad.b3.begin(), grad.b3.end(), 0.0);

    detail::MlpWorkspace ws(p);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = inputs[i];
        const int label = labels[i];
        if (label < 0 || label >= c) throw InvalidParameter("loss_and_gradients: label out of range");
        detail::forward_into(p, y, ws);
        total -= detail::log_prob(ws, label);

        // softmax + cross entropy: dL/dz3 = probs - onehot
        for (int k = 0; k < c; ++k) ws.dz3[static_cast<std::size_t>(k)] = ws.probs[static_cast<std::size_t>(k)];
        ws.dz3[static_cast<std::size_t>(label)] -= 1.0;

        for (int k = 0; k < c; ++k) {
            const double d = ws.dz3[static_cast<std::size_t>(k)];
            double* gw = grad.w3.data() + static_cast<std::size_t>(k) * h2;
            for (int j = 0; j < h2; ++j) gw[j] += d * ws.a2[static_cast<std::size_t>(j)];
            grad.b3[static_cast<std::size_t>(k)] += d;
        }
        for (int j = 0; j < h2; ++j) {
            double acc = 0.0;
            for (int k = 0; k < c; ++k)
                acc += p.w3[static_cast<std::size_t>(k) * h2 + j] * ws.dz3[static_cast<std::size_t>(k)];
            ws.dz2[static_cast<std::size_t>(j)] = ws.z2[static_cast<std::size_t>(j)] > 0.0 ? acc : 0.0;
        }
        for (int j = 0; j < h2; ++j) {
            const double d = ws.dz2[static_cast<std::size_t>(j)];
            if (d == 0.0) continue;
            double* gw = grad.w2.data() + static_cast<std::size_t>(j) * h1;
            for (int i1 = 0; i1 < h1; ++i1) gw[i1] += d * ws.a1[static_cast<std::size_t>(i1)];
            grad.b2[static_cast<std::size_t>(j)] += d;
        }
        for (int i1 = 0; i1 < h1; ++i1) {
            double acc = 0.0;
            for (int j = 0; j < h2; ++j)
                acc += p.w2[static_cast<std::size_t>(j) * h1 + i1] * ws.dz2[static_cast<std::size_t>(j)];
            const double a = ws.a1[static_cast<std::size_t>(i1)];
            ws.dz1[static_cast<std::size_t>(i1)] = acc * a * (1.0 - a);
        }
        for (int i1 = 0; i1 < h1; ++i1) {
            grad.w1[static_cast<std::size_t>(i1)] += ws.dz1[static_cast<std::size_t>(i1)] * y;
            grad.b1[static_cast<std::size_t>(i1)] += ws.dz1[static_cast<std::size_t>(i1)];
        }
    }

    const double inv = 1.0 / static_cast<double>(n);
    for (double& g : grad.w1) g *= inv;
    for (double& g : grad.b1) g *= inv;
    for (double& g : grad.w2) g *= inv;
    for (double& g : grad.b2) g *= inv;
    for (double& g : grad.w3) g *= inv;
    for (double& g : grad.b3) g *= inv;
    return total * inv;
}

struct TrainOutcome {
    MlpParams params;
    std::vector<double> epoch_loss;  // mean training loss per epoch
};

namespace detail {

struct AdamState {
    MlpParams m, v;
    long long step = 0;
    explicit AdamState(const MlpParams& shape)
        : m(shape.hidden1, shape.hidden2, shape.classes),
          v(shape.hidden1, shape.hidden2, shape.classes) {}
};

inline void adam_update(MlpParams& p, const MlpParams& g, AdamState& state,
                        const TrainConfig& cfg) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& theta, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            theta[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon);
        }
    };
    update(p.w1, g.w1, state.m.w1, state.v.w1);
    update(p.b1, g.b1, state.m.b1, state.v.b1);
    update(p.w2, g.w2, state.m.w2, state.v.w2);
    update(p.b2, g.b2, state.m.b2, state.v.b2);
    update(p.w3, g.w3, state.m.w3, state.v.w3);
    update(p.b3, g.b3, state.m.b3, state.v.b3);
}

}  // namespace detail

// Minimizes mean cross-entropy with mini-batch Adam. Deterministic given
// (rng seed, data, config): init draws, then one Fisher-Yates shuffle per
// epoch, all from the supplied stream.
inline TrainOutcome train_mlp(const TrainingSet& data, const TrainConfig& cfg, rng::Stream& rng,
                              int hidden1 = 100, int hidden2 = 50) {
    if (data.size() == 0) throw InvalidParameter("train_mlp: empty training set");
    if (data.num_classes < 2) throw InvalidParameter("train_mlp: need at least 2 classes");
    if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
        throw InvalidParameter("train_mlp: bad training configuration");

    MlpParams params(hidden1, hidden2, data.num_classes);
    glorot_init(params, rng);
    MlpParams grad(hidden1, hidden2, data.num_classes);
    detail::AdamState adam(params);

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> batch_inputs(static_cast<std::size_t>(cfg.batch_size));
    std::vector<int> batch_labels(static_cast<std::size_t>(cfg.batch_size));

    TrainOutcome outcome;
    outcome.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[static_cast<std::size_t>(rng.next_index(static_cast<int>(i + 1)))]);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count = std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
            for (std::size_t i = 0; i < count; ++i) {
                batch_inputs[i] = data.inputs[order[start + i]];
                batch_labels[i] = data.labels[order[start + i]];
            }
            double batch_loss = loss_and_gradients(
                params, {batch_inputs.data(), count}, {batch_labels.data(), count}, grad);
            loss_sum += batch_loss * static_cast<double>(count);
            detail::adam_update(params, grad, adam, cfg);
        }
        double epoch_loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw NumericalDegeneracy("train_mlp: loss diverged at epoch " +
                                      std::to_string(epoch + 1));
        outcome.epoch_loss.push_back(epoch_loss);
    }
    outcome.params = std::move(params);
    return outcome;
}

}  // namespace isilab
