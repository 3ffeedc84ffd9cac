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

#include "cost.hpp"
#include "errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace apopt {

struct HjConfig {
    int initial_step_m = 64;
    int min_step_m = 1;
    std::int64_t max_evals = 20000;

    void validate() const {
        detail::require_config(min_step_m >= 1 && initial_step_m >= min_step_m,
                               "hj steps must satisfy initial_step_m >= min_step_m >= 1");
        detail::require_config(max_evals >= 1, "hj.max_evals must be >= 1");
    }
};

struct HjResult {
    ApTriple positions{};
    double cost = 0.0;
    std::int64_t evals = 0;
    int final_step_m = 0;
    bool budget_exhausted = false;
    std::vector<double> accepted_costs;  // strictly decreasing, starts with cost(x0)
};

/// Integer Hooke-Jeeves pattern search over [0, length]^3.
///
/// Exploratory moves probe each coordinate in order x1, x2, x3, +step before -step
/// (clipped to the tunnel), keeping a probe only on strict improvement. A
/// successful exploration is followed by pattern moves x + (x - x_prev) while they
/// keep paying off; a failed exploration halves the step (integer division,
/// floored at min_step). The search ends when an exploration at min_step fails,
/// so on normal termination no single +-min_step move improves the result.
template <class CostFn>
HjResult hooke_jeeves(const ApTriple& x0, int length, CostFn&& cost, const HjConfig& cfg = {}) {
    cfg.validate();
    for (int x : x0)
        if (x < 0 || x > length) throw DomainError("HJ start position " + std::to_string(x) + " outside [0, L]");

    HjResult r;
    std::int64_t evals = 0;
    auto eval = [&](const ApTriple& x) {
        ++evals;
        return static_cast<double>(cost(x));
    };
    auto budget_left = [&] { return evals < cfg.max_evals; };

    // Returns the improved point (or the start when nothing improved) and its cost.
    auto explore = [&](ApTriple x, double fx, int step) {
        for (std::size_t i = 0; i < 3; ++i) {
            for (int dir : {+1, -1}) {
                if (!budget_left()) return std::pair{x, fx};
                ApTriple probe = x;
                probe[i] = std::clamp(x[i] + dir * step, 0, length);
                if (probe[i] == x[i]) continue;
                const double fp = eval(probe);
                if (fp < fx) {
                    x = probe;
                    fx = fp;
                    break;
                }
            }
        }
        return std::pair{x, fx};
    };

    ApTriple base = x0;
    double fbase = eval(base);
    r.accepted_costs.push_back(fbase);
    int step = cfg.initial_step_m;

    while (budget_left()) {
        auto [x, fx] = explore(base, fbase, step);
        if (fx < fbase) {
            for (;;) {
                const ApTriple prev = base;
                base = x;
                fbase = fx;
                r.accepted_costs.push_back(fbase);
                if (!budget_left()) break;
                ApTriple pattern{};
                for (std::size_t i = 0; i < 3; ++i) pattern[i] = std::clamp(2 * base[i] - prev[i], 0, length);
                const double fpat = eval(pattern);
                auto [x2, fx2] = explore(pattern, fpat, step);
                if (fx2 < fbase) {
                    x = x2;
                    fx = fx2;
                } else {
                    break;
                }
            }
        } else {
            if (step <= cfg.min_step_m) break;
            step = std::max(step / 2, cfg.min_step_m);
        }
    }
    r.positions = base;
    r.cost = fbase;
    r.evals = evals;
    r.final_step_m = step;
    r.budget_exhausted = !budget_left();
    return r;
}

/// Hooke-Jeeves on the combined cost of a path-loss map.
inline HjResult hooke_jeeves(const ApTriple& x0, const PathLossMap& map, const CostConfig& cost_cfg,
                             const HjConfig& cfg = {}) {
    cost_cfg.validate();
    const int length = static_cast<int>(std::floor(map.geometry().length_m + 1e-9));
    return hooke_jeeves(x0, length, [&](const ApTriple& x) { return combined_cost(x, map, cost_cfg); }, cfg);
}

} // namespace apopt
