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

// Conditional GAN surrogate for path-loss profiles: a coarse profile plus a
// condition vector is refined to the full receiver grid. The generator is a
// shared-weight MLP applied patch by patch on top of a linear-interpolation
// skip path; the critic scores fixed-width windows (1-D patch critic).

#include "channel.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apopt::cgan {

struct CganConfig {
    int downsample = 10;           // fine points per coarse sample
    int generator_window = 16;     // fine points refined per generator patch
    int critic_window = 16;        // w
    std::size_t hidden = 128;
    double lambda_l1 = 100.0;
    double generator_lr = 3e-3;
    double critic_lr = 1e-3;
    double real_label = 1.0;
    double fake_label = 0.0;
    int epochs = 200;
    int windows_per_step = 0;      // random patches per update; 0 = every patch
    double val_fraction = 0.2;
    double value_scale_db = 10.0;  // dB per network input unit
    double offset_scale_m = 100.0; // m per unit of the patch-to-AP offset input
    std::uint64_t seed = 0;

    void validate() const {
        detail::require_config(downsample >= 2, "cgan.downsample must be >= 2");
        detail::require_config(generator_window >= 1 && critic_window >= 1, "cgan windows must be >= 1");
        detail::require_config(hidden >= 1, "cgan.hidden must be >= 1");
        detail::require_config(lambda_l1 >= 0.0, "cgan.lambda_l1 must be >= 0");
        detail::require_config(generator_lr > 0.0 && critic_lr > 0.0, "cgan learning rates must be > 0");
        detail::require_config(epochs >= 0, "cgan.epochs must be >= 0");
        detail::require_config(windows_per_step >= 0, "cgan.windows_per_step must be >= 0");
        detail::require_config(val_fraction >= 0.0 && val_fraction < 1.0, "cgan.val_fraction must lie in [0, 1)");
        detail::require_config(value_scale_db > 0.0 && offset_scale_m > 0.0, "cgan scales must be > 0");
    }
};

/// One training sample: coarse profile x, condition c, fine profile y and the
/// forward-region mask m (1 at and beyond the AP).
struct CganPair {
    int ap_position_m = 0;
    std::vector<double> coarse;
    std::vector<double> condition;
    std::vector<double> fine;
    std::vector<double> mask;
};

/// Shared sampling geometry of a dataset.
struct Sampling {
    std::size_t fine_count = 0;
    double spacing_m = 0.1;
    double length_m = 0.0;
    std::vector<std::size_t> coarse_indices;
};

struct CganDataset {
    Sampling sampling;
    std::vector<CganPair> train;
    std::vector<CganPair> val;
};

inline constexpr std::size_t kConditionSize = 3;

/// Fine indices 0, k, 2k, ... plus the last index when it is not already included.
inline std::vector<std::size_t> coarse_indices(std::size_t fine_count, int downsample) {
    detail::require_config(downsample >= 2, "downsample factor must be >= 2");
    detail::require(fine_count >= 2, "fine profile needs at least 2 points");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < fine_count; i += static_cast<std::size_t>(downsample)) idx.push_back(i);
    if (idx.back() != fine_count - 1) idx.push_back(fine_count - 1);
    return idx;
}

inline std::vector<double> downsample_profile(std::span<const double> fine, std::span<const std::size_t> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = fine[idx[k]];
    return out;
}

/// Linear interpolation of coarse samples back onto the fine grid.
inline std::vector<double> upsample(std::span<const double> coarse, const Sampling& s) {
    detail::require(coarse.size() == s.coarse_indices.size(), "coarse profile length does not match sampling");
    std::vector<double> out(s.fine_count);
    for (std::size_t k = 0; k + 1 < s.coarse_indices.size(); ++k) {
        const std::size_t i0 = s.coarse_indices[k];
        const std::size_t i1 = s.coarse_indices[k + 1];
        const double span = static_cast<double>(i1 - i0);
        for (std::size_t i = i0; i <= i1; ++i) {
            const double t = static_cast<double>(i - i0) / span;
            out[i] = coarse[k] + t * (coarse[k + 1] - coarse[k]);
        }
    }
    return out;
}

/// 1 for receivers at or beyond the AP position, 0 before it.
inline std::vector<double> forward_mask(int ap_position_m, const Sampling& s) {
    std::vector<double> m(s.fine_count);
    for (std::size_t i = 0; i < s.fine_count; ++i)
        m[i] = static_cast<double>(i) * s.spacing_m >= static_cast<double>(ap_position_m) - 1e-9 ? 1.0 : 0.0;
    return m;
}

/// c = [AP position / L, L / 1000 m, receiver spacing in m].
inline std::vector<double> condition_vector(int ap_position_m, const Sampling& s) {
    return {static_cast<double>(ap_position_m) / s.length_m, s.length_m / 1000.0, s.spacing_m};
}

inline Sampling sampling_for(const PathLossMap& map, int downsample) {
    Sampling s;
    s.fine_count = map.grid().count;
    s.spacing_m = map.grid().spacing_m;
    s.length_m = map.geometry().length_m;
    s.coarse_indices = coarse_indices(s.fine_count, downsample);
    return s;
}

inline CganPair make_pair(const PathLossProfile& profile, const Sampling& s) {
    CganPair p;
    p.ap_position_m = profile.ap_position_m;
    p.fine = profile.values;
    p.coarse = downsample_profile(p.fine, s.coarse_indices);
    p.condition = condition_vector(profile.ap_position_m, s);
    p.mask = forward_mask(profile.ap_position_m, s);
    return p;
}

/// Pairs for every profile of the map, split by AP position with a seeded shuffle;
/// floor(n * val_fraction) positions (at least one when val_fraction > 0) go to validation.
inline CganDataset build_dataset(const PathLossMap& map, int downsample, std::uint64_t split_seed,
                                 double val_fraction = 0.2) {
    detail::require_config(downsample >= 2, "downsample factor must be >= 2");
    detail::require_config(val_fraction >= 0.0 && val_fraction < 1.0, "val_fraction must lie in [0, 1)");
    if (map.size() < 10) throw DomainError("cGAN dataset needs at least 10 profiles, map has " + std::to_string(map.size()));
    CganDataset ds;
    ds.sampling = sampling_for(map, downsample);
    std::vector<int> positions = map.positions();
    std::mt19937_64 rng(split_seed);
    for (std::size_t i = positions.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(positions[i - 1], positions[pick(rng)]);
    }
    std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(positions.size()) * val_fraction));
    if (val_fraction > 0.0) n_val = std::max<std::size_t>(n_val, 1);
    std::vector<int> val(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<int> train(positions.begin() + static_cast<std::ptrdiff_t>(n_val), positions.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    for (int p : train) ds.train.push_back(make_pair(map.at(p), ds.sampling));
    for (int p : val) ds.val.push_back(make_pair(map.at(p), ds.sampling));
    return ds;
}

// ---- metrics -------------------------------------------------------------

namespace detail_ {
inline double mask_count(std::span<const double> y, std::span<const double> y_hat, std::span<const double> m) {
    if (y.size() != y_hat.size() || y.size() != m.size()) throw DomainError("masked metric: length mismatch");
    double n = 0.0;
    for (double v : m) n += v;
    if (!(n > 0.0)) throw DomainError("masked metric: mask selects no entries");
    return n;
}
} // namespace detail_

/// (1/N) sum_i m_i (y_i - y_hat_i)^2 with N = sum_i m_i.
inline double masked_mse(std::span<const double> y, std::span<const double> y_hat, std::span<const double> m) {
    const double n = detail_::mask_count(y, y_hat, m);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        s += m[i] * e * e;
    }
    return s / n;
}

/// (1/N) sum_i m_i |y_i - y_hat_i| with N = sum_i m_i.
inline double masked_mae(std::span<const double> y, std::span<const double> y_hat, std::span<const double> m) {
    const double n = detail_::mask_count(y, y_hat, m);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += m[i] * std::abs(y[i] - y_hat[i]);
    return s / n;
}

// ---- networks ------------------------------------------------------------

/// Patch layout shared by generator and critic: patch k covers fine indices
/// [k w, k w + w); the tail patch is padded by repeating the last fine value.
inline std::size_t patch_count(std::size_t n, int w) { return (n + static_cast<std::size_t>(w) - 1) / static_cast<std::size_t>(w); }

inline double padded(std::span<const double> v, std::size_t i) { return v[std::min(i, v.size() - 1)]; }

class CganNets {
public:
    CganNets() = default;

    CganNets(const CganConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        const auto gw = static_cast<std::size_t>(cfg.generator_window);
        const auto cw = static_cast<std::size_t>(cfg.critic_window);
        generator_ = nn::Mlp({gw + 1 + kConditionSize, cfg.hidden, cfg.hidden, gw}, seed);
        generator_.zero_output_layer();
        critic_ = nn::Mlp({2 * cw + 1 + kConditionSize, cfg.hidden, cfg.hidden, 1}, seed + 1);
    }

    CganNets(const CganConfig& cfg, nn::Mlp generator, nn::Mlp critic)
        : cfg_(cfg), generator_(std::move(generator)), critic_(std::move(critic)) {
        cfg_.validate();
        const auto gw = static_cast<std::size_t>(cfg.generator_window);
        const auto cw = static_cast<std::size_t>(cfg.critic_window);
        detail::require(generator_.input_size() == gw + 1 + kConditionSize && generator_.output_size() == gw,
                        "generator shape does not match the configured window");
        detail::require(critic_.input_size() == 2 * cw + 1 + kConditionSize && critic_.output_size() == 1,
                        "critic shape does not match the configured window");
    }

    const CganConfig& config() const noexcept { return cfg_; }
    nn::Mlp& generator() noexcept { return generator_; }
    const nn::Mlp& generator() const noexcept { return generator_; }
    nn::Mlp& critic() noexcept { return critic_; }
    const nn::Mlp& critic() const noexcept { return critic_; }

    /// Generator input rows for the selected patches of one sample.
    std::vector<double> generator_inputs(std::span<const double> up, std::span<const double> c, int ap_position_m,
                                         const Sampling& s, std::span<const std::size_t> patches) const {
        const auto w = static_cast<std::size_t>(cfg_.generator_window);
        const std::size_t width = generator_.input_size();
        std::vector<double> in(patches.size() * width);
        for (std::size_t r = 0; r < patches.size(); ++r) {
            const std::size_t start = patches[r] * w;
            double* row = in.data() + r * width;
            double mean = 0.0;
            for (std::size_t k = 0; k < w; ++k) mean += padded(up, start + k);
            mean /= static_cast<double>(w);
            for (std::size_t k = 0; k < w; ++k) row[k] = (padded(up, start + k) - mean) / cfg_.value_scale_db;
            const double centre_m = (static_cast<double>(start) + 0.5 * static_cast<double>(w - 1)) * s.spacing_m;
            row[w] = (centre_m - ap_position_m) / cfg_.offset_scale_m;
            std::copy(c.begin(), c.end(), row + w + 1);
        }
        return in;
    }

    /// Critic input rows: candidate residual over the coarse skip path, the
    /// mean-removed coarse patch, patch offset from the AP and c.
    std::vector<double> critic_inputs(std::span<const double> candidate, std::span<const double> up,
                                      std::span<const double> c, int ap_position_m, const Sampling& s,
                                      std::span<const std::size_t> patches) const {
        const auto w = static_cast<std::size_t>(cfg_.critic_window);
        const std::size_t width = critic_.input_size();
        std::vector<double> in(patches.size() * width);
        for (std::size_t r = 0; r < patches.size(); ++r) {
            const std::size_t start = patches[r] * w;
            double* row = in.data() + r * width;
            double mean = 0.0;
            for (std::size_t k = 0; k < w; ++k) mean += padded(up, start + k);
            mean /= static_cast<double>(w);
            for (std::size_t k = 0; k < w; ++k) {
                row[k] = (padded(candidate, start + k) - padded(up, start + k)) / cfg_.value_scale_db;
                row[w + k] = (padded(up, start + k) - mean) / cfg_.value_scale_db;
            }
            const double centre_m = (static_cast<double>(start) + 0.5 * static_cast<double>(w - 1)) * s.spacing_m;
            row[2 * w] = (centre_m - ap_position_m) / cfg_.offset_scale_m;
            std::copy(c.begin(), c.end(), row + 2 * w + 1);
        }
        return in;
    }

private:
    CganConfig cfg_{};
    nn::Mlp generator_;
    nn::Mlp critic_;
};

inline std::vector<std::size_t> all_patches(std::size_t n, int w) {
    std::vector<std::size_t> p(patch_count(n, w));
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
}

/// y_hat = upsample(x) + G(x, c), one generator patch at a time.
inline std::vector<double> generator_forward(const CganNets& nets, std::span<const double> coarse,
                                             std::span<const double> condition, int ap_position_m, const Sampling& s) {
    detail::require(condition.size() == kConditionSize, "condition vector has wrong length");
    std::vector<double> out = upsample(coarse, s);
    const auto w = static_cast<std::size_t>(nets.config().generator_window);
    const auto patches = all_patches(s.fine_count, nets.config().generator_window);
    const auto in = nets.generator_inputs(out, condition, ap_position_m, s, patches);
    nn::MlpCache cache;
    nets.generator().forward(in, patches.size(), cache);
    const auto& res = cache.acts.back();
    for (std::size_t r = 0; r < patches.size(); ++r)
        for (std::size_t k = 0; k < w; ++k) {
            const std::size_t i = patches[r] * w + k;
            if (i < s.fine_count) out[i] += res[r * w + k];
        }
    return out;
}

inline std::vector<double> generator_forward(const CganNets& nets, const CganPair& p, const Sampling& s) {
    return generator_forward(nets, p.coarse, p.condition, p.ap_position_m, s);
}

// ---- losses --------------------------------------------------------------

/// Binary cross-entropy of sigmoid(logit) against label, and its derivative w.r.t. the logit.
inline double bce_with_logit(double logit, double label, double* d_logit = nullptr) {
    const double sp_pos = logit > 0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));  // softplus(l)
    const double loss = sp_pos - label * logit;
    if (d_logit != nullptr) *d_logit = 1.0 / (1.0 + std::exp(-logit)) - label;
    return loss;
}

struct EpochTrace {
    int epoch = 0;
    double critic_loss = 0.0;
    double generator_adv_loss = 0.0;
    double generator_l1 = 0.0;    // masked L1 on training pairs (mean over pairs)
    double val_mae = 0.0;         // masked MAE on validation pairs; NaN without validation data
};

struct TrainResult {
    std::vector<EpochTrace> trace;
};

/// Patch-level outputs of the critic on a sample, used by tests and diagnostics.
inline std::vector<double> critic_scores(const CganNets& nets, std::span<const double> candidate, const CganPair& p,
                                         const Sampling& s) {
    const auto up = upsample(p.coarse, s);
    const auto patches = all_patches(s.fine_count, nets.config().critic_window);
    const auto in = nets.critic_inputs(candidate, up, p.condition, p.ap_position_m, s, patches);
    nn::MlpCache cache;
    nets.critic().forward(in, patches.size(), cache);
    std::vector<double> out = cache.acts.back();
    for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
    return out;
}

/// Fraction of critic patches classified correctly (real >= 0.5, generated < 0.5).
inline double critic_accuracy(const CganNets& nets, std::span<const CganPair> pairs, const Sampling& s) {
    std::size_t correct = 0, total = 0;
    for (const auto& p : pairs) {
        for (double v : critic_scores(nets, p.fine, p, s)) correct += v >= 0.5 ? 1 : 0, ++total;
        const auto fake = generator_forward(nets, p, s);
        for (double v : critic_scores(nets, fake, p, s)) correct += v < 0.5 ? 1 : 0, ++total;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

/// Single-sample generator gradient split into its adversarial and lambda-weighted L1 parts.
struct GeneratorGradients {
    std::vector<double> adversarial;
    std::vector<double> reconstruction;
    double adversarial_loss = 0.0;
    double l1 = 0.0;
};

class Trainer {
public:
    Trainer(CganNets& nets, const Sampling& sampling)
        : nets_(nets), s_(sampling),
          adam_g_(nets.generator().param_count(), nn::AdamConfig{nets.config().generator_lr, 0.5, 0.999, 1e-8}),
          adam_d_(nets.critic().param_count(), nn::AdamConfig{nets.config().critic_lr, 0.5, 0.999, 1e-8}) {}

    GeneratorGradients generator_gradients(const CganPair& p, std::span<const std::size_t> gen_patches) {
        const auto& cfg = nets_.config();
        GeneratorGradients out;
        const auto gw = static_cast<std::size_t>(cfg.generator_window);
        const auto cw = static_cast<std::size_t>(cfg.critic_window);
        const auto up = upsample(p.coarse, s_);
        const auto fake = forward_patches(p, up, gen_patches);
        const auto critic_patches = covering_patches(gen_patches, gw, cw);

        // Adversarial term through the critic: d(loss)/d(fake) on the covered fine points.
        std::vector<double> d_fake(s_.fine_count, 0.0);
        const auto cin = nets_.critic_inputs(fake, up, p.condition, p.ap_position_m, s_, critic_patches);
        nets_.critic().forward(cin, critic_patches.size(), critic_cache_);
        std::vector<double> d_logit(critic_patches.size());
        for (std::size_t r = 0; r < critic_patches.size(); ++r) {
            out.adversarial_loss += bce_with_logit(critic_cache_.acts.back()[r], cfg.real_label, &d_logit[r]);
            d_logit[r] /= static_cast<double>(critic_patches.size());
        }
        out.adversarial_loss /= static_cast<double>(critic_patches.size());
        std::vector<double> scratch(nets_.critic().param_count(), 0.0);
        std::vector<double> d_cin(cin.size());
        nets_.critic().backward(critic_cache_, d_logit, scratch, d_cin);
        const std::size_t cwidth = nets_.critic().input_size();
        for (std::size_t r = 0; r < critic_patches.size(); ++r)
            for (std::size_t k = 0; k < cw; ++k) {
                // padded tail entries repeat the last fine value
                const std::size_t i = std::min(critic_patches[r] * cw + k, s_.fine_count - 1);
                d_fake[i] += d_cin[r * cwidth + k] / cfg.value_scale_db;
            }

        // lambda * masked L1 over the generated fine points.
        std::vector<double> d_rec(s_.fine_count, 0.0);
        double n = 0.0, l1 = 0.0;
        for (auto patch : gen_patches)
            for (std::size_t k = 0; k < gw; ++k) {
                const std::size_t i = patch * gw + k;
                if (i < s_.fine_count) n += p.mask[i];
            }
        if (n > 0.0) {
            for (auto patch : gen_patches)
                for (std::size_t k = 0; k < gw; ++k) {
                    const std::size_t i = patch * gw + k;
                    if (i >= s_.fine_count || p.mask[i] == 0.0) continue;
                    const double e = fake[i] - p.fine[i];
                    l1 += p.mask[i] * std::abs(e);
                    d_rec[i] = cfg.lambda_l1 * p.mask[i] * (e > 0 ? 1.0 : (e < 0 ? -1.0 : 0.0)) / n;
                }
            l1 /= n;
        }
        out.l1 = l1;
        out.adversarial = backprop_generator(gen_patches, d_fake);
        out.reconstruction = backprop_generator(gen_patches, d_rec);
        return out;
    }

    /// One critic update followed by one generator update on sample p. Returns
    /// {critic loss, generator adversarial loss, generator L1}.
    template <class Rng>
    std::array<double, 3> step(const CganPair& p, Rng& rng) {
        const auto& cfg = nets_.config();
        const auto gw = static_cast<std::size_t>(cfg.generator_window);
        const auto cw = static_cast<std::size_t>(cfg.critic_window);
        const auto gen_patches = choose_patches(rng);
        const auto up = upsample(p.coarse, s_);
        const auto fake = forward_patches(p, up, gen_patches);
        const auto critic_patches = covering_patches(gen_patches, gw, cw);

        // Critic: real patches -> real_label, generated patches -> fake_label.
        double d_loss = 0.0;
        std::vector<double> g_d(nets_.critic().param_count(), 0.0);
        const double scale = 0.5 / static_cast<double>(critic_patches.size());
        for (int pass = 0; pass < 2; ++pass) {
            const auto& candidate = pass == 0 ? p.fine : fake;
            const double label = pass == 0 ? cfg.real_label : cfg.fake_label;
            const auto cin = nets_.critic_inputs(candidate, up, p.condition, p.ap_position_m, s_, critic_patches);
            nets_.critic().forward(cin, critic_patches.size(), critic_cache_);
            std::vector<double> d_logit(critic_patches.size());
            for (std::size_t r = 0; r < critic_patches.size(); ++r) {
                d_loss += scale * bce_with_logit(critic_cache_.acts.back()[r], label, &d_logit[r]);
                d_logit[r] *= scale;
            }
            nets_.critic().backward(critic_cache_, d_logit, g_d);
        }
        nn::adam_step(nets_.critic().params(), g_d, adam_d_);

        // Generator against the updated critic.
        auto grads = generator_gradients(p, gen_patches);
        for (std::size_t k = 0; k < grads.adversarial.size(); ++k) grads.adversarial[k] += grads.reconstruction[k];
        nn::adam_step(nets_.generator().params(), grads.adversarial, adam_g_);
        return {d_loss, grads.adversarial_loss, grads.l1};
    }

    template <class Rng>
    std::vector<std::size_t> choose_patches(Rng& rng) const {
        auto patches = all_patches(s_.fine_count, nets_.config().generator_window);
        const auto want = static_cast<std::size_t>(nets_.config().windows_per_step);
        if (want == 0 || want >= patches.size()) return patches;
        for (std::size_t k = 0; k < want; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, patches.size() - 1);
            std::swap(patches[k], patches[pick(rng)]);
        }
        patches.resize(want);
        std::sort(patches.begin(), patches.end());
        return patches;
    }

private:
    // Generated profile: skip path everywhere, generator residual on the chosen patches.
    std::vector<double> forward_patches(const CganPair& p, const std::vector<double>& up,
                                        std::span<const std::size_t> patches) {
        const auto w = static_cast<std::size_t>(nets_.config().generator_window);
        gen_in_ = nets_.generator_inputs(up, p.condition, p.ap_position_m, s_, patches);
        nets_.generator().forward(gen_in_, patches.size(), gen_cache_);
        std::vector<double> fake = up;
        const auto& res = gen_cache_.acts.back();
        for (std::size_t r = 0; r < patches.size(); ++r)
            for (std::size_t k = 0; k < w; ++k) {
                const std::size_t i = patches[r] * w + k;
                if (i < s_.fine_count) fake[i] += res[r * w + k];
            }
        return fake;
    }

    std::vector<double> backprop_generator(std::span<const std::size_t> patches, const std::vector<double>& d_fine) {
        const auto w = static_cast<std::size_t>(nets_.config().generator_window);
        std::vector<double> d_out(patches.size() * w, 0.0);
        for (std::size_t r = 0; r < patches.size(); ++r)
            for (std::size_t k = 0; k < w; ++k) {
                const std::size_t i = patches[r] * w + k;
                if (i < s_.fine_count) d_out[r * w + k] = d_fine[i];
            }
        std::vector<double> g(nets_.generator().param_count(), 0.0);
        nn::MlpCache cache = gen_cache_;
        nets_.generator().backward(cache, d_out, g);
        return g;
    }

    // Critic patches overlapping the fine points refined by the generator patches.
    std::vector<std::size_t> covering_patches(std::span<const std::size_t> gen_patches, std::size_t gw,
                                              std::size_t cw) const {
        std::vector<std::size_t> out;
        const std::size_t n_critic = patch_count(s_.fine_count, static_cast<int>(cw));
        for (auto gp : gen_patches) {
            const std::size_t first = gp * gw;
            const std::size_t last = std::min(first + gw, s_.fine_count) - 1;
            for (std::size_t c = first / cw; c <= last / cw && c < n_critic; ++c) out.push_back(c);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    CganNets& nets_;
    Sampling s_;
    nn::AdamState adam_g_, adam_d_;
    nn::MlpCache gen_cache_, critic_cache_;
    std::vector<double> gen_in_;
};

inline double mean_val_mae(const CganNets& nets, const CganDataset& ds) {
    if (ds.val.empty()) return std::nan("");
    double s = 0.0;
    for (const auto& p : ds.val) s += masked_mae(p.fine, generator_forward(nets, p, ds.sampling), p.mask);
    return s / static_cast<double>(ds.val.size());
}

/// Residual-identity baseline: validation MAE of the upsampled coarse input.
inline double baseline_val_mae(const CganDataset& ds) {
    if (ds.val.empty()) return std::nan("");
    double s = 0.0;
    for (const auto& p : ds.val) s += masked_mae(p.fine, upsample(p.coarse, ds.sampling), p.mask);
    return s / static_cast<double>(ds.val.size());
}

using EpochCallback = std::function<void(const EpochTrace&)>;

/// Alternating critic / generator updates, one training pair per step, pairs
/// visited in a seeded random order each epoch.
inline TrainResult train_cgan(CganNets& nets, const CganDataset& ds, int epochs, std::uint64_t seed,
                              const EpochCallback& on_epoch = {}) {
    detail::require(!ds.train.empty(), "cGAN training set is empty");
    detail::require_config(epochs >= 0, "epochs must be >= 0");
    Trainer trainer(nets, ds.sampling);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(ds.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    TrainResult result;
    for (int e = 0; e < epochs; ++e) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(rng)]);
        }
        EpochTrace t;
        t.epoch = e + 1;
        for (auto k : order) {
            const auto [d, adv, l1] = trainer.step(ds.train[k], rng);
            t.critic_loss += d;
            t.generator_adv_loss += adv;
            t.generator_l1 += l1;
        }
        const double n = static_cast<double>(order.size());
        t.critic_loss /= n;
        t.generator_adv_loss /= n;
        t.generator_l1 /= n;
        t.val_mae = mean_val_mae(nets, ds);
        result.trace.push_back(t);
        if (on_epoch) on_epoch(t);
    }
    return result;
}

inline TrainResult train_cgan(CganNets& nets, const CganDataset& ds, std::uint64_t seed) {
    return train_cgan(nets, ds, nets.config().epochs, seed);
}

// ---- reporting -----------------------------------------------------------

/// Linear-interpolation percentile: rank = p/100 * (n - 1) over the sorted values.
inline double percentile(std::vector<double> v, double p) {
    detail::require(!v.empty(), "percentile of empty set");
    std::sort(v.begin(), v.end());
    const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double p90 = 0.0;
};

inline SummaryStats summarize(const std::vector<double>& v) {
    detail::require(!v.empty(), "summary of empty set");
    SummaryStats s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(var / static_cast<double>(v.size()));
    s.p90 = percentile(v, 90.0);
    return s;
}

struct ErrorRow {
    int ap_position_m = 0;
    double mse = 0.0;
    double mae = 0.0;
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    SummaryStats mse;
    SummaryStats mae;
};

inline ErrorReport error_report(const CganNets& nets, std::span<const CganPair> pairs, const Sampling& s) {
    detail::require(!pairs.empty(), "error report needs at least one pair");
    ErrorReport r;
    std::vector<double> mse, mae;
    for (const auto& p : pairs) {
        const auto y_hat = generator_forward(nets, p, s);
        r.rows.push_back({p.ap_position_m, masked_mse(p.fine, y_hat, p.mask), masked_mae(p.fine, y_hat, p.mask)});
        mse.push_back(r.rows.back().mse);
        mae.push_back(r.rows.back().mae);
    }
    std::sort(r.rows.begin(), r.rows.end(), [](const auto& a, const auto& b) { return a.ap_position_m < b.ap_position_m; });
    r.mse = summarize(mse);
    r.mae = summarize(mae);
    return r;
}

/// Per-position rows: ap_position_m,mse_db2,mae_db (values with 9 decimals).
inline void write_error_rows_csv(const ErrorReport& r, const std::string& path) {
    io::CsvWriter csv(path, "ap_position_m,mse_db2,mae_db");
    for (const auto& row : r.rows) csv.row({std::to_string(row.ap_position_m), io::fixed(row.mse, 9), io::fixed(row.mae, 9)});
}

/// Summary block: metric,mean,std,p90,n.
inline void write_error_summary_csv(const ErrorReport& r, const std::string& path) {
    io::CsvWriter csv(path, "metric,mean,std,p90,n");
    const auto n = std::to_string(r.rows.size());
    csv.row({"mse_db2", io::fixed(r.mse.mean, 9), io::fixed(r.mse.std, 9), io::fixed(r.mse.p90, 9), n});
    csv.row({"mae_db", io::fixed(r.mae.mean, 9), io::fixed(r.mae.std, 9), io::fixed(r.mae.p90, 9), n});
}

/// Map with every source position: true profiles where the fine data was used
/// for training, generator output from the coarse profile everywhere else.
inline PathLossMap augment_map(const CganNets& nets, const PathLossMap& source, const Sampling& s,
                               const std::vector<int>& fine_positions) {
    PathLossMap out(source.geometry(), source.grid());
    for (const auto& [pos, profile] : source.profiles()) {
        if (std::binary_search(fine_positions.begin(), fine_positions.end(), pos)) {
            out.insert(profile);
            continue;
        }
        const auto coarse = downsample_profile(profile.values, s.coarse_indices);
        out.insert(PathLossProfile{pos, generator_forward(nets, coarse, condition_vector(pos, s), pos, s)});
    }
    return out;
}

// ---- persistence ---------------------------------------------------------

/// Checkpoint: {"format": "apopt.cgan", "version", the geometry-relevant config
/// fields, "generator" and "critic" in the nn checkpoint format}.
inline nlohmann::json to_json(const CganNets& nets) {
    const auto& c = nets.config();
    return {{"format", "apopt.cgan"},
            {"version", nn::kCheckpointVersion},
            {"generator_window", c.generator_window},
            {"critic_window", c.critic_window},
            {"hidden", c.hidden},
            {"value_scale_db", c.value_scale_db},
            {"offset_scale_m", c.offset_scale_m},
            {"generator", nn::to_json(nets.generator())},
            {"critic", nn::to_json(nets.critic())}};
}

inline CganNets cgan_from_json(const nlohmann::json& j, CganConfig cfg = {}) {
    try {
        if (j.at("format").get<std::string>() != "apopt.cgan") throw ParseError("not an apopt.cgan checkpoint", 0);
        if (j.at("version").get<int>() != nn::kCheckpointVersion) throw ParseError("unsupported checkpoint version", 0);
        cfg.generator_window = j.at("generator_window").get<int>();
        cfg.critic_window = j.at("critic_window").get<int>();
        cfg.hidden = j.at("hidden").get<std::size_t>();
        cfg.value_scale_db = j.at("value_scale_db").get<double>();
        cfg.offset_scale_m = j.at("offset_scale_m").get<double>();
        return CganNets(cfg, nn::mlp_from_json(j.at("generator")), nn::mlp_from_json(j.at("critic")));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed cGAN checkpoint: ") + e.what(), 0);
    }
}

/// Dataset cache, one value per row:
/// ap_position_m,split,series,index,value with series in {coarse, condition, fine, mask}.
inline void write_dataset_csv(const CganDataset& ds, const std::string& path) {
    io::CsvWriter csv(path, "ap_position_m,split,series,index,value");
    auto emit = [&](const CganPair& p, const char* split) {
        const auto pos = std::to_string(p.ap_position_m);
        auto series = [&](const char* name, const std::vector<double>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) csv.row({pos, split, name, std::to_string(i), io::fixed(v[i], 6)});
        };
        series("coarse", p.coarse);
        series("condition", p.condition);
        series("fine", p.fine);
        series("mask", p.mask);
    };
    for (const auto& p : ds.train) emit(p, "train");
    for (const auto& p : ds.val) emit(p, "val");
}

} // namespace apopt::cgan
