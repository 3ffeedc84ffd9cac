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

// JSON run configuration: every section optional, unknown keys rejected,
// resolved values echoed back with all defaults filled in.

#include "agents.hpp"
#include "cgan.hpp"
#include "channel.hpp"
#include "cost.hpp"
#include "env.hpp"
#include "errors.hpp"
#include "hj.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace apopt {

/// Experiment-harness settings that belong to no single module.
struct RunSettings {
    std::uint64_t seed = 0;
    int seeds = 5;                          // independent runs per method in compare
    std::vector<double> alphas{0.0, 0.5, 1.0};
    int subsample_stride_m = 10;            // AP stride of the fine profiles used for cGAN training
    int map_stride_m = 1;                   // AP stride of simulated maps
    double augmented_gap_pct = 10.0;        // allowed cost gap of the augmented-map run

    void validate() const {
        detail::require_config(seeds >= 1, "run.seeds must be >= 1");
        detail::require_config(!alphas.empty(), "run.alphas must not be empty");
        for (double a : alphas) detail::require_config(a >= 0.0 && a <= 1.0, "run.alphas must lie in [0, 1]");
        detail::require_config(subsample_stride_m >= 1, "run.subsample_stride_m must be >= 1");
        detail::require_config(map_stride_m >= 1, "run.map_stride_m must be >= 1");
        detail::require_config(augmented_gap_pct >= 0.0, "run.augmented_gap_pct must be >= 0");
    }
};

struct RunConfig {
    TunnelGeometry geometry;
    AntennaConfig antenna;
    double grid_spacing_m = 0.1;
    SyntheticModelParams model;
    CostConfig cost;
    EnvConfig env;
    Hyperparams agent;
    HjConfig hj;
    cgan::CganConfig cgan;
    RunSettings run;

    ReceiverGrid grid() const { return ReceiverGrid::for_length(geometry.length_m, grid_spacing_m); }

    void validate() const {
        geometry.validate();
        antenna.validate();
        detail::require_config(grid_spacing_m > 0.0 && std::isfinite(grid_spacing_m), "grid.spacing_m must be > 0");
        model.validate();
        cost.validate();
        env.validate();
        agent.validate();
        hj.validate();
        cgan.validate();
        run.validate();
    }
};

namespace config_detail {

// Reads or writes the fields of one JSON object; in read mode unknown keys
// are reported by finish().
class Binder {
public:
    Binder(nlohmann::json& obj, std::string section, bool reading)
        : obj_(obj), section_(std::move(section)), reading_(reading) {
        if (reading_ && !obj_.is_object()) throw ConfigError("section '" + section_ + "' must be a JSON object");
    }

    template <class T>
    void field(const char* key, T& value) {
        seen_.insert(key);
        if (!reading_) {
            obj_[key] = value;
            return;
        }
        if (!obj_.contains(key)) return;
        try {
            value = obj_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(section_ + "." + key + " has the wrong type");
        }
    }

    template <class E>
    void enumeration(const char* key, E& value, std::initializer_list<std::pair<const char*, E>> names) {
        seen_.insert(key);
        if (!reading_) {
            for (const auto& [n, v] : names)
                if (v == value) obj_[key] = n;
            return;
        }
        if (!obj_.contains(key)) return;
        const auto& j = obj_.at(key);
        if (j.is_string())
            for (const auto& [n, v] : names)
                if (j.get<std::string>() == n) {
                    value = v;
                    return;
                }
        throw ConfigError(section_ + "." + key + " has an unknown value");
    }

    void finish() const {
        if (!reading_) return;
        for (const auto& [k, v] : obj_.items())
            if (!seen_.count(k)) throw ConfigError("unknown key '" + section_ + "." + k + "'");
    }

private:
    nlohmann::json& obj_;
    std::string section_;
    bool reading_;
    std::set<std::string> seen_;
};

template <class Fn>
void section(nlohmann::json& root, const char* name, bool reading, Fn&& fn) {
    if (reading && !root.contains(name)) return;
    nlohmann::json& obj = root[name];
    if (!reading) obj = nlohmann::json::object();
    Binder b(obj, name, reading);
    fn(b);
    b.finish();
}

inline void bind(nlohmann::json& root, RunConfig& c, bool reading) {
    section(root, "geometry", reading, [&](Binder& b) {
        b.field("length_m", c.geometry.length_m);
        b.field("curvature_radius_m", c.geometry.curvature_radius_m);
        b.field("rel_permittivity", c.geometry.rel_permittivity);
        b.field("conductivity_s_per_m", c.geometry.conductivity_s_per_m);
        b.field("ap_height_m", c.geometry.ap_height_m);
        b.field("ap_wall_offset_m", c.geometry.ap_wall_offset_m);
    });
    section(root, "antenna", reading, [&](Binder& b) {
        b.field("tx_power_dbm", c.antenna.tx_power_dbm);
        b.field("tx_gain_dbi", c.antenna.tx_gain_dbi);
        b.field("frequency_hz", c.antenna.frequency_hz);
    });
    section(root, "grid", reading, [&](Binder& b) { b.field("spacing_m", c.grid_spacing_m); });
    section(root, "model", reading, [&](Binder& b) {
        b.field("d0_m", c.model.d0_m);
        b.field("waveguide_atten_db_per_m", c.model.waveguide_atten_db_per_m);
        b.field("exponent", c.model.exponent);
        b.field("curvature_k_db_m", c.model.curvature_k_db_m);
        b.field("ripple_amplitude_db", c.model.ripple_amplitude_db);
        b.field("ripple_period1_m", c.model.ripple_period1_m);
        b.field("ripple_period2_m", c.model.ripple_period2_m);
        b.field("level_offset_db", c.model.level_offset_db);
    });
    section(root, "cost", reading, [&](Binder& b) {
        b.field("threshold_db", c.cost.threshold_db);
        b.field("penalty_coeff", c.cost.penalty_coeff);
        b.field("alpha", c.cost.alpha);
    });
    section(root, "env", reading, [&](Binder& b) {
        b.field("step_m", c.env.step_m);
        b.field("terminate_threshold", c.env.terminate_threshold);
        b.field("max_steps_per_episode", c.env.max_steps_per_episode);
        b.field("initial_positions", c.env.initial_positions);
        b.field("cost_scale", c.env.cost_scale);
    });
    section(root, "agent", reading, [&](Binder& b) {
        b.field("gamma", c.agent.gamma);
        b.field("epsilon_start", c.agent.epsilon_start);
        b.field("epsilon_decay", c.agent.epsilon_decay);
        b.field("epsilon_min", c.agent.epsilon_min);
        b.enumeration("epsilon_schedule", c.agent.epsilon_schedule,
                      {{"multiplicative", EpsilonSchedule::multiplicative}, {"exponential", EpsilonSchedule::exponential}});
        b.field("epsilon_exp_rate", c.agent.epsilon_exp_rate);
        b.field("episodes", c.agent.episodes);
        b.field("batch_size", c.agent.batch_size);
        b.field("replay_capacity", c.agent.replay_capacity);
        b.field("target_sync_every", c.agent.target_sync_every);
        b.field("learning_rate", c.agent.learning_rate);
        b.enumeration("optimizer", c.agent.optimizer, {{"adam", OptimizerKind::adam}, {"sgd", OptimizerKind::sgd}});
        b.field("reward_scale", c.agent.reward_scale);
        b.field("hidden1", c.agent.shape.hidden1);
        b.field("hidden2", c.agent.shape.hidden2);
    });
    section(root, "hj", reading, [&](Binder& b) {
        b.field("initial_step_m", c.hj.initial_step_m);
        b.field("min_step_m", c.hj.min_step_m);
        b.field("max_evals", c.hj.max_evals);
    });
    section(root, "cgan", reading, [&](Binder& b) {
        b.field("downsample", c.cgan.downsample);
        b.field("generator_window", c.cgan.generator_window);
        b.field("critic_window", c.cgan.critic_window);
        b.field("hidden", c.cgan.hidden);
        b.field("lambda_l1", c.cgan.lambda_l1);
        b.field("generator_lr", c.cgan.generator_lr);
        b.field("critic_lr", c.cgan.critic_lr);
        b.field("real_label", c.cgan.real_label);
        b.field("fake_label", c.cgan.fake_label);
        b.field("epochs", c.cgan.epochs);
        b.field("windows_per_step", c.cgan.windows_per_step);
        b.field("val_fraction", c.cgan.val_fraction);
        b.field("value_scale_db", c.cgan.value_scale_db);
        b.field("offset_scale_m", c.cgan.offset_scale_m);
    });
    section(root, "run", reading, [&](Binder& b) {
        b.field("seed", c.run.seed);
        b.field("seeds", c.run.seeds);
        b.field("alphas", c.run.alphas);
        b.field("subsample_stride_m", c.run.subsample_stride_m);
        b.field("map_stride_m", c.run.map_stride_m);
        b.field("augmented_gap_pct", c.run.augmented_gap_pct);
    });
}

inline const std::set<std::string>& section_names() {
    static const std::set<std::string> names{"geometry", "antenna", "grid", "model", "cost",
                                             "env",      "agent",   "hj",   "cgan",  "run"};
    return names;
}

} // namespace config_detail

/// Parses a configuration document; absent sections and keys keep their defaults.
inline RunConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [k, v] : doc.items())
        if (!config_detail::section_names().count(k)) throw ConfigError("unknown section '" + k + "'");
    RunConfig c;
    nlohmann::json copy = doc;
    config_detail::bind(copy, c, true);
    c.validate();
    return c;
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

/// Fully resolved configuration with every key present.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json root = nlohmann::json::object();
    RunConfig copy = c;
    config_detail::bind(root, copy, false);
    return root;
}

} // namespace apopt
