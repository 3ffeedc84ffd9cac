// SPDX-License-Identifier: Apache-2.0
//
// apopt - access point placement optimization for tunnel radio coverage
// Copyright (C) 2026 The apopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Dense network core with hand-written backpropagation: flat parameter storage,
// batched dense kernels, the Q-network (plain or dueling head), a generic MLP,
// Adam/SGD updates and JSON checkpoints.

#include "errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace apopt::nn {

enum class Activation { relu, linear };

inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

/// One dense layer inside a flat parameter vector: weights (out x in, row-major)
/// start at offset, followed by out biases.
struct DenseLayer {
    std::string name;
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::linear;
    std::size_t offset = 0;

    std::size_t weight_count() const { return in * out; }
    std::size_t param_count() const { return in * out + out; }
    std::size_t bias_offset() const { return offset + in * out; }
};

class ParamLayout {
public:
    const DenseLayer& add(std::string name, std::size_t in, std::size_t out, Activation act) {
        layers_.push_back(DenseLayer{std::move(name), in, out, act, total_});
        total_ += layers_.back().param_count();
        return layers_.back();
    }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    const DenseLayer& operator[](std::size_t i) const { return layers_[i]; }
    std::size_t size() const noexcept { return layers_.size(); }
    std::size_t total() const noexcept { return total_; }

private:
    std::vector<DenseLayer> layers_;
    std::size_t total_ = 0;
};

// ---- kernels -------------------------------------------------------------

namespace kernel {

inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

/// y[n, :] = act(W x[n, :] + b) for n < batch.
inline void dense_forward(const DenseLayer& l, const double* params, const double* x, double* y, std::size_t batch) {
    const double* w = params + l.offset;
    const double* b = params + l.bias_offset();
    for (std::size_t n = 0; n < batch; ++n) {
        const double* xn = x + n * l.in;
        double* yn = y + n * l.out;
        for (std::size_t o = 0; o < l.out; ++o) yn[o] = b[o] + dot(w + o * l.in, xn, l.in);
        if (l.activation == Activation::relu)
            for (std::size_t o = 0; o < l.out; ++o) yn[o] = yn[o] > 0.0 ? yn[o] : 0.0;
    }
}

/// Backward through one layer. dy is the gradient w.r.t. the layer output (post
/// activation) and is overwritten with the pre-activation gradient. Parameter
/// gradients accumulate into grads; dx (may be null) receives the input gradient.
inline void dense_backward(const DenseLayer& l, const double* params, const double* x, const double* y, double* dy,
                           double* grads, double* dx, std::size_t batch) {
    const double* w = params + l.offset;
    double* gw = grads + l.offset;
    double* gb = grads + l.bias_offset();
    if (l.activation == Activation::relu)
        for (std::size_t k = 0; k < batch * l.out; ++k)
            if (!(y[k] > 0.0)) dy[k] = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
        const double* xn = x + n * l.in;
        const double* dyn = dy + n * l.out;
        for (std::size_t o = 0; o < l.out; ++o) {
            const double g = dyn[o];
            if (g == 0.0) continue;
            gb[o] += g;
            double* row = gw + o * l.in;
            for (std::size_t i = 0; i < l.in; ++i) row[i] += g * xn[i];
        }
    }
    if (dx != nullptr) {
        std::fill(dx, dx + batch * l.in, 0.0);
        for (std::size_t n = 0; n < batch; ++n) {
            const double* dyn = dy + n * l.out;
            double* dxn = dx + n * l.in;
            for (std::size_t o = 0; o < l.out; ++o) {
                const double g = dyn[o];
                if (g == 0.0) continue;
                const double* row = w + o * l.in;
                for (std::size_t i = 0; i < l.in; ++i) dxn[i] += g * row[i];
            }
        }
    }
}

} // namespace kernel

// ---- initialisation ------------------------------------------------------

/// He-uniform weights for ReLU layers, U(-head_range, head_range) for linear layers, zero biases.
inline void initialize(const ParamLayout& layout, std::span<double> params, std::uint64_t seed,
                       double head_range = 0.01) {
    std::mt19937_64 rng(seed);
    std::fill(params.begin(), params.end(), 0.0);
    for (const auto& l : layout.layers()) {
        const double limit = l.activation == Activation::relu ? std::sqrt(6.0 / static_cast<double>(l.in)) : head_range;
        if (limit == 0.0) continue;
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t k = 0; k < l.weight_count(); ++k) params[l.offset + k] = dist(rng);
    }
}

// ---- Q-network -----------------------------------------------------------

enum class HeadKind { plain, dueling };

inline const char* to_string(HeadKind k) { return k == HeadKind::plain ? "plain" : "dueling"; }

struct QNetShape {
    std::size_t input = 4;
    std::size_t hidden1 = 64;
    std::size_t hidden2 = 64;
    std::size_t actions = 27;

    friend bool operator==(const QNetShape&, const QNetShape&) = default;
};

/// Scratch buffers of one batched forward pass, reused across calls.
struct QCache {
    std::size_t batch = 0;
    std::vector<double> input, h1, h2, value, head, q;
    std::vector<double> d_h1, d_h2, d_value, d_head;
};

/// Shared ReLU trunk (input -> hidden1 -> hidden2) followed by either a linear Q
/// readout (plain) or value and advantage streams aggregated as
/// Q(s,a) = V(s) + A(s,a) - mean_a' A(s,a') (dueling).
class QNetwork {
public:
    QNetwork() : QNetwork(HeadKind::dueling, QNetShape{}, 0) {}

    QNetwork(HeadKind kind, QNetShape shape, std::uint64_t seed) : kind_(kind), shape_(shape) {
        detail::require_config(shape.input > 0 && shape.hidden1 > 0 && shape.hidden2 > 0 && shape.actions > 0,
                               "network sizes must be positive");
        layout_.add("hidden1", shape.input, shape.hidden1, Activation::relu);
        layout_.add("hidden2", shape.hidden1, shape.hidden2, Activation::relu);
        if (kind == HeadKind::dueling) {
            layout_.add("value", shape.hidden2, 1, Activation::linear);
            layout_.add("advantage", shape.hidden2, shape.actions, Activation::linear);
        } else {
            layout_.add("q", shape.hidden2, shape.actions, Activation::linear);
        }
        params_.assign(layout_.total(), 0.0);
        initialize(layout_, params_, seed);
    }

    HeadKind kind() const noexcept { return kind_; }
    const QNetShape& shape() const noexcept { return shape_; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::size_t param_count() const noexcept { return params_.size(); }

    /// Copies parameters from a network of identical architecture (target sync).
    void assign_params(const QNetwork& other) {
        detail::require(other.kind_ == kind_ && other.shape_ == shape_, "assign_params: architecture mismatch");
        params_ = other.params_;
    }
    void assign_params(std::span<const double> p) {
        detail::require(p.size() == params_.size(), "assign_params: size mismatch");
        std::copy(p.begin(), p.end(), params_.begin());
    }

    /// Batched forward; inputs is batch x input row-major. Q values land in cache.q (batch x actions).
    void forward(std::span<const double> inputs, std::size_t batch, QCache& c) const {
        detail::require(inputs.size() == batch * shape_.input, "forward: input size mismatch");
        const std::size_t na = shape_.actions;
        c.batch = batch;
        c.input.assign(inputs.begin(), inputs.end());
        c.h1.resize(batch * shape_.hidden1);
        c.h2.resize(batch * shape_.hidden2);
        c.q.resize(batch * na);
        const double* p = params_.data();
        kernel::dense_forward(layout_[0], p, c.input.data(), c.h1.data(), batch);
        kernel::dense_forward(layout_[1], p, c.h1.data(), c.h2.data(), batch);
        if (kind_ == HeadKind::plain) {
            kernel::dense_forward(layout_[2], p, c.h2.data(), c.q.data(), batch);
            return;
        }
        c.value.resize(batch);
        c.head.resize(batch * na);
        kernel::dense_forward(layout_[2], p, c.h2.data(), c.value.data(), batch);
        kernel::dense_forward(layout_[3], p, c.h2.data(), c.head.data(), batch);
        for (std::size_t n = 0; n < batch; ++n) {
            const double* adv = c.head.data() + n * na;
            double mean = 0.0;
            for (std::size_t a = 0; a < na; ++a) mean += adv[a];
            mean /= static_cast<double>(na);
            double* q = c.q.data() + n * na;
            for (std::size_t a = 0; a < na; ++a) q[a] = c.value[n] + (adv[a] - mean);
        }
    }

    /// Accumulates dL/dparams into grads given dL/dQ (batch x actions) for the pass in c.
    void backward(QCache& c, std::span<const double> d_q, std::span<double> grads) const {
        const std::size_t batch = c.batch;
        const std::size_t na = shape_.actions;
        detail::require(d_q.size() == batch * na, "backward: output-gradient size mismatch");
        detail::require(grads.size() == params_.size(), "backward: gradient buffer size mismatch");
        const double* p = params_.data();
        c.d_h2.assign(batch * shape_.hidden2, 0.0);
        c.d_h1.assign(batch * shape_.hidden1, 0.0);
        if (kind_ == HeadKind::plain) {
            c.d_head.assign(d_q.begin(), d_q.end());
            kernel::dense_backward(layout_[2], p, c.h2.data(), c.q.data(), c.d_head.data(), grads.data(),
                                   c.d_h2.data(), batch);
        } else {
            // dV = sum_a dQ_a ; dA_a = dQ_a - mean_a' dQ_a'
            c.d_value.resize(batch);
            c.d_head.resize(batch * na);
            for (std::size_t n = 0; n < batch; ++n) {
                const double* dq = d_q.data() + n * na;
                double sum = 0.0;
                for (std::size_t a = 0; a < na; ++a) sum += dq[a];
                c.d_value[n] = sum;
                const double mean = sum / static_cast<double>(na);
                for (std::size_t a = 0; a < na; ++a) c.d_head[n * na + a] = dq[a] - mean;
            }
            std::vector<double> d_h2_adv(batch * shape_.hidden2);
            kernel::dense_backward(layout_[2], p, c.h2.data(), c.value.data(), c.d_value.data(), grads.data(),
                                   c.d_h2.data(), batch);
            kernel::dense_backward(layout_[3], p, c.h2.data(), c.head.data(), c.d_head.data(), grads.data(),
                                   d_h2_adv.data(), batch);
            for (std::size_t k = 0; k < d_h2_adv.size(); ++k) c.d_h2[k] += d_h2_adv[k];
        }
        kernel::dense_backward(layout_[1], p, c.h1.data(), c.h2.data(), c.d_h2.data(), grads.data(), c.d_h1.data(),
                               batch);
        kernel::dense_backward(layout_[0], p, c.input.data(), c.h1.data(), c.d_h1.data(), grads.data(), nullptr,
                               batch);
    }

    /// Q values for a single input.
    std::vector<double> q_values(std::span<const double> input) const {
        QCache c;
        forward(input, 1, c);
        return c.q;
    }

    /// State value V(s) of the dueling head for a single input.
    double state_value(std::span<const double> input) const {
        detail::require(kind_ == HeadKind::dueling, "state_value needs a dueling head");
        QCache c;
        forward(input, 1, c);
        return c.value[0];
    }

private:
    HeadKind kind_;
    QNetShape shape_;
    ParamLayout layout_;
    std::vector<double> params_;
};

inline std::vector<double> forward(const QNetwork& net, std::span<const double> s_norm) { return net.q_values(s_norm); }

/// Parameter gradients of the scalar loss whose gradient w.r.t. the Q output is grad_out.
inline std::vector<double> backward(const QNetwork& net, std::span<const double> s_norm,
                                    std::span<const double> grad_out) {
    QCache c;
    net.forward(s_norm, 1, c);
    std::vector<double> grads(net.param_count(), 0.0);
    net.backward(c, grad_out, grads);
    return grads;
}

/// Independent copy of the network's parameters (the target network).
inline QNetwork clone_params(const QNetwork& net) { return net; }

// ---- generic MLP ---------------------------------------------------------

struct MlpCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[k+1] = output of layer k
    std::vector<std::vector<double>> grads;
};

/// Feed-forward stack of dense layers.
class Mlp {
public:
    Mlp() = default;

    /// sizes = {in, h1, ..., out}; hidden layers use ReLU, the last layer is linear.
    Mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed, double head_range = 0.01) {
        detail::require_config(sizes.size() >= 2, "MLP needs at least input and output sizes");
        for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
            const bool last = k + 2 == sizes.size();
            layout_.add("layer" + std::to_string(k), sizes[k], sizes[k + 1],
                        last ? Activation::linear : Activation::relu);
        }
        params_.assign(layout_.total(), 0.0);
        initialize(layout_, params_, seed, head_range);
    }

    std::size_t input_size() const { return layout_[0].in; }
    std::size_t output_size() const { return layout_[layout_.size() - 1].out; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::size_t param_count() const noexcept { return params_.size(); }

    /// Zeroes the output layer's weights and biases.
    void zero_output_layer() {
        const auto& l = layout_[layout_.size() - 1];
        std::fill(params_.begin() + static_cast<std::ptrdiff_t>(l.offset),
                  params_.begin() + static_cast<std::ptrdiff_t>(l.offset + l.param_count()), 0.0);
    }

    /// Output rows in c.acts.back() (batch x output_size).
    void forward(std::span<const double> inputs, std::size_t batch, MlpCache& c) const {
        detail::require(inputs.size() == batch * input_size(), "MLP forward: input size mismatch");
        c.batch = batch;
        c.acts.resize(layout_.size() + 1);
        c.acts[0].assign(inputs.begin(), inputs.end());
        for (std::size_t k = 0; k < layout_.size(); ++k) {
            c.acts[k + 1].resize(batch * layout_[k].out);
            kernel::dense_forward(layout_[k], params_.data(), c.acts[k].data(), c.acts[k + 1].data(), batch);
        }
    }

    /// Accumulates parameter gradients; writes the input gradient into d_input when nonempty.
    void backward(MlpCache& c, std::span<const double> d_out, std::span<double> grads,
                  std::span<double> d_input = {}) const {
        const std::size_t batch = c.batch;
        detail::require(d_out.size() == batch * output_size(), "MLP backward: output-gradient size mismatch");
        detail::require(grads.size() == params_.size(), "MLP backward: gradient buffer size mismatch");
        c.grads.resize(layout_.size() + 1);
        c.grads[layout_.size()].assign(d_out.begin(), d_out.end());
        for (std::size_t k = layout_.size(); k-- > 0;) {
            const bool need_dx = k > 0 || !d_input.empty();
            if (need_dx) c.grads[k].resize(batch * layout_[k].in);
            kernel::dense_backward(layout_[k], params_.data(), c.acts[k].data(), c.acts[k + 1].data(),
                                   c.grads[k + 1].data(), grads.data(), need_dx ? c.grads[k].data() : nullptr, batch);
        }
        if (!d_input.empty()) {
            detail::require(d_input.size() == batch * input_size(), "MLP backward: input-gradient size mismatch");
            std::copy(c.grads[0].begin(), c.grads[0].end(), d_input.begin());
        }
    }

private:
    ParamLayout layout_;
    std::vector<double> params_;
};

// ---- optimisers ----------------------------------------------------------

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& opt) {
    if (params.size() != grads.size() || params.size() != opt.m.size() || opt.m.size() != opt.v.size())
        throw DomainError("adam_step: parameter/gradient/state shapes differ");
    const auto& c = opt.config;
    ++opt.step;
    const double t = static_cast<double>(opt.step);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        opt.m[k] = c.beta1 * opt.m[k] + (1.0 - c.beta1) * g;
        opt.v[k] = c.beta2 * opt.v[k] + (1.0 - c.beta2) * g * g;
        const double m_hat = opt.m[k] / bc1;
        const double v_hat = opt.v[k] / bc2;
        params[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.eps);
    }
}

inline void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate) {
    if (params.size() != grads.size()) throw DomainError("sgd_step: parameter/gradient shapes differ");
    for (std::size_t k = 0; k < params.size(); ++k) params[k] -= learning_rate * grads[k];
}

// ---- checkpoints ---------------------------------------------------------
//
// JSON document:
//   { "format": "apopt.qnetwork" | "apopt.mlp", "version": 1,
//     "head": "plain" | "dueling"            (Q-networks only),
//     "layers": [ { "name", "in", "out", "activation",
//                   "weights": [out*in, row-major], "biases": [out] }, ... ] }
// Doubles are written in shortest round-trip form, so save/load is exact.

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json layers_to_json(const ParamLayout& layout, std::span<const double> params) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : layout.layers()) {
        auto w0 = params.begin() + static_cast<std::ptrdiff_t>(l.offset);
        auto b0 = params.begin() + static_cast<std::ptrdiff_t>(l.bias_offset());
        layers.push_back({{"name", l.name},
                          {"in", l.in},
                          {"out", l.out},
                          {"activation", to_string(l.activation)},
                          {"weights", std::vector<double>(w0, w0 + static_cast<std::ptrdiff_t>(l.weight_count()))},
                          {"biases", std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(l.out))}});
    }
    return layers;
}

inline void layers_from_json(const nlohmann::json& layers, const ParamLayout& layout, std::span<double> params) {
    if (!layers.is_array() || layers.size() != layout.size())
        throw ParseError("checkpoint layer count does not match architecture", 0);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const auto& l = layout[k];
        const auto& j = layers[k];
        if (j.at("in").get<std::size_t>() != l.in || j.at("out").get<std::size_t>() != l.out ||
            j.at("activation").get<std::string>() != to_string(l.activation))
            throw ParseError("checkpoint layer '" + l.name + "' shape mismatch", 0);
        const auto w = j.at("weights").get<std::vector<double>>();
        const auto b = j.at("biases").get<std::vector<double>>();
        if (w.size() != l.weight_count() || b.size() != l.out)
            throw ParseError("checkpoint layer '" + l.name + "' parameter count mismatch", 0);
        std::copy(w.begin(), w.end(), params.begin() + static_cast<std::ptrdiff_t>(l.offset));
        std::copy(b.begin(), b.end(), params.begin() + static_cast<std::ptrdiff_t>(l.bias_offset()));
    }
}

inline nlohmann::json to_json(const QNetwork& net) {
    return {{"format", "apopt.qnetwork"},
            {"version", kCheckpointVersion},
            {"head", to_string(net.kind())},
            {"layers", layers_to_json(net.layout(), net.params())}};
}

inline QNetwork qnetwork_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "apopt.qnetwork" || j.at("version").get<int>() != kCheckpointVersion)
            throw ParseError("not an apopt.qnetwork v1 checkpoint", 0);
        const auto head = j.at("head").get<std::string>();
        if (head != "plain" && head != "dueling") throw ParseError("unknown head '" + head + "'", 0);
        const auto& layers = j.at("layers");
        QNetShape shape{layers.at(0).at("in").get<std::size_t>(), layers.at(0).at("out").get<std::size_t>(),
                        layers.at(1).at("out").get<std::size_t>(), layers.back().at("out").get<std::size_t>()};
        QNetwork net(head == "plain" ? HeadKind::plain : HeadKind::dueling, shape, 0);
        layers_from_json(layers, net.layout(), net.params());
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what(), 0);
    }
}

inline nlohmann::json to_json(const Mlp& mlp) {
    return {{"format", "apopt.mlp"}, {"version", kCheckpointVersion}, {"layers", layers_to_json(mlp.layout(), mlp.params())}};
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "apopt.mlp" || j.at("version").get<int>() != kCheckpointVersion)
            throw ParseError("not an apopt.mlp v1 checkpoint", 0);
        const auto& layers = j.at("layers");
        std::vector<std::size_t> sizes{layers.at(0).at("in").get<std::size_t>()};
        for (const auto& l : layers) sizes.push_back(l.at("out").get<std::size_t>());
        Mlp mlp(sizes, 0);
        layers_from_json(layers, mlp.layout(), mlp.params());
        return mlp;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what(), 0);
    }
}

inline void save_checkpoint(const nlohmann::json& doc, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << doc.dump(1) << '\n';
}

inline nlohmann::json read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open '" + path + "'", 0);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
}

} // namespace apopt::nn
