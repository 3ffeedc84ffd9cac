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
#include "errors.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

namespace apopt {

/// Three AP positions along the tunnel axis, integer meters.
using ApTriple = std::array<int, 3>;

/// Uniform threshold th and penalty coefficient lambda for every receiver, and the
/// convex weight alpha between the mean and worst-case terms.
struct CostConfig {
    double threshold_db = 30.0;
    double penalty_coeff = 10.0;
    double alpha = 0.5;

    void validate() const {
        detail::require_config(alpha >= 0.0 && alpha <= 1.0, "cost.alpha must lie in [0, 1]");
        detail::require_config(penalty_coeff >= 0.0, "cost.penalty_coeff must be >= 0");
        detail::require_config(std::isfinite(threshold_db), "cost.threshold_db must be finite");
    }
};

/// pl + lambda * max(0, pl - th)
constexpr double penalized(double pl, const CostConfig& cfg) {
    return pl + cfg.penalty_coeff * std::max(0.0, pl - cfg.threshold_db);
}

struct CostTerms {
    double f1 = 0.0;        // mean of penalized path loss
    double f2 = 0.0;        // max of penalized path loss
    double combined = 0.0;  // alpha f1 + (1 - alpha) f2
    std::size_t violations = 0;  // receivers with PL > th
};

inline CostTerms cost_terms(std::span<const double> pl, const CostConfig& cfg) {
    detail::require(!pl.empty(), "cost functions need a nonempty path-loss vector");
    double sum = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    for (double v : pl) {
        const double p = penalized(v, cfg);
        sum += p;
        worst = std::max(worst, p);
        violations += v > cfg.threshold_db ? 1 : 0;
    }
    CostTerms t;
    t.f1 = sum / static_cast<double>(pl.size());
    t.f2 = worst;
    t.combined = cfg.alpha * t.f1 + (1.0 - cfg.alpha) * t.f2;
    t.violations = violations;
    return t;
}

inline double f1(std::span<const double> pl, const CostConfig& cfg) { return cost_terms(pl, cfg).f1; }
inline double f2(std::span<const double> pl, const CostConfig& cfg) { return cost_terms(pl, cfg).f2; }

/// Terms of the cost for AP positions X over a path-loss map, evaluated in one pass
/// without materialising the min-combined vector.
inline CostTerms cost_terms(std::span<const int> positions, const PathLossMap& map, const CostConfig& cfg) {
    detail::require(!positions.empty(), "cost needs at least one AP position");
    std::array<const double*, 8> small{};
    std::vector<const double*> large;
    const double** rows = small.data();
    if (positions.size() > small.size()) {
        large.resize(positions.size());
        rows = large.data();
    }
    for (std::size_t j = 0; j < positions.size(); ++j) rows[j] = map.at(positions[j]).values.data();

    const std::size_t m = map.grid().count;
    double sum = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = rows[0][i];
        for (std::size_t j = 1; j < positions.size(); ++j) v = std::min(v, rows[j][i]);
        const double p = penalized(v, cfg);
        sum += p;
        worst = std::max(worst, p);
        violations += v > cfg.threshold_db ? 1 : 0;
    }
    CostTerms t;
    t.f1 = sum / static_cast<double>(m);
    t.f2 = worst;
    t.combined = cfg.alpha * t.f1 + (1.0 - cfg.alpha) * t.f2;
    t.violations = violations;
    return t;
}

inline double combined_cost(std::span<const int> positions, const PathLossMap& map, const CostConfig& cfg) {
    return cost_terms(positions, map, cfg).combined;
}

inline double combined_cost(const ApTriple& x, const PathLossMap& map, const CostConfig& cfg) {
    return cost_terms(std::span<const int>(x), map, cfg).combined;
}

inline double percent_improvement(double initial, double optimized) {
    return 100.0 * (initial - optimized) / initial;
}

} // namespace apopt
