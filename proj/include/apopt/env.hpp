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

#include "channel.hpp"
#include "cost.hpp"
#include "errors.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace apopt {

inline constexpr int kActionCount = 27;
inline constexpr int kStateSize = 4;

/// Per-AP move direction, each component in {-1, 0, +1}.
struct Action {
    int a1 = 0;
    int a2 = 0;
    int a3 = 0;

    constexpr int operator[](std::size_t i) const { return i == 0 ? a1 : (i == 1 ? a2 : a3); }
    friend constexpr bool operator==(const Action&, const Action&) = default;
};

constexpr bool is_valid(const Action& a) {
    auto ok = [](int v) { return v >= -1 && v <= 1; };
    return ok(a.a1) && ok(a.a2) && ok(a.a3);
}

/// Base-3 index: (a1+1)*9 + (a2+1)*3 + (a3+1).
inline int encode(const Action& a) {
    detail::require(is_valid(a), "action components must be in {-1, 0, +1}");
    return (a.a1 + 1) * 9 + (a.a2 + 1) * 3 + (a.a3 + 1);
}

inline Action decode(int idx) {
    if (idx < 0 || idx >= kActionCount)
        throw DomainError("action index " + std::to_string(idx) + " outside [0, 26]");
    return Action{idx / 9 - 1, (idx % 9) / 3 - 1, idx % 3 - 1};
}

struct EnvConfig {
    int step_m = 1;
    int length_m = 1500;
    double terminate_threshold = 20.0;
    int max_steps_per_episode = 200;
    ApTriple initial_positions{0, 500, 1000};
    double cost_scale = 300.0;  // g normalisation for the network input

    void validate() const {
        detail::require_config(step_m >= 1, "env.step_m must be >= 1");
        detail::require_config(length_m >= 1, "env.length_m must be >= 1");
        detail::require_config(std::isfinite(terminate_threshold), "env.terminate_threshold must be finite");
        detail::require_config(max_steps_per_episode >= 1, "env.max_steps_per_episode must be >= 1");
        detail::require_config(cost_scale > 0.0, "env.cost_scale must be > 0");
        for (int x : initial_positions)
            detail::require_config(x >= 0 && x <= length_m, "env.initial_positions must lie in [0, length_m]");
    }
};

/// Physical state: AP positions (m) and the combined cost g at those positions.
struct State {
    ApTriple positions{};
    double cost = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

struct StepResult {
    State next;
    double reward = 0.0;
    bool done = false;
};

inline int clip_position(int x, int length) { return std::clamp(x, 0, length); }

inline State reset(const EnvConfig& env_cfg, const PathLossMap& map, const CostConfig& cost_cfg) {
    return State{env_cfg.initial_positions, combined_cost(env_cfg.initial_positions, map, cost_cfg)};
}

/// x_i' = clip(x_i + a_i * step, 0, L); reward = -g'; done iff g' < threshold.
inline StepResult step(const State& s, int action_idx, const PathLossMap& map, const CostConfig& cost_cfg,
                       const EnvConfig& env_cfg) {
    const Action a = decode(action_idx);
    ApTriple next{};
    for (std::size_t i = 0; i < 3; ++i)
        next[i] = clip_position(s.positions[i] + a[i] * env_cfg.step_m, env_cfg.length_m);
    const double g = combined_cost(next, map, cost_cfg);
    return StepResult{State{next, g}, -g, g < env_cfg.terminate_threshold};
}

/// Network input: positions divided by L, cost divided by cost_scale.
inline std::array<double, kStateSize> normalize(const State& s, const EnvConfig& env_cfg) {
    const double len = static_cast<double>(env_cfg.length_m);
    return {s.positions[0] / len, s.positions[1] / len, s.positions[2] / len, s.cost / env_cfg.cost_scale};
}

/// Environment bound to one read-only map and cost configuration.
class TunnelEnv {
public:
    TunnelEnv(const PathLossMap& map, CostConfig cost_cfg, EnvConfig env_cfg)
        : map_(&map), cost_(cost_cfg), env_(env_cfg) {
        cost_.validate();
        env_.validate();
        detail::require_config(static_cast<double>(env_.length_m) <= map.geometry().length_m + 1e-9,
                               "env.length_m exceeds the map's tunnel length");
    }

    State reset() const { return apopt::reset(env_, *map_, cost_); }
    StepResult step(const State& s, int action_idx) const { return apopt::step(s, action_idx, *map_, cost_, env_); }
    std::array<double, kStateSize> observe(const State& s) const { return normalize(s, env_); }
    double cost(const ApTriple& x) const { return combined_cost(x, *map_, cost_); }

    const PathLossMap& map() const noexcept { return *map_; }
    const CostConfig& cost_config() const noexcept { return cost_; }
    const EnvConfig& config() const noexcept { return env_; }

private:
    const PathLossMap* map_;
    CostConfig cost_;
    EnvConfig env_;
};

} // namespace apopt
