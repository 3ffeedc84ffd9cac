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


#include <apopt/hj.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <random>

using namespace apopt;

namespace {

bool is_local_minimum(const ApTriple& x, int length, const auto& cost) {
    const double fx = cost(x);
    for (std::size_t i = 0; i < 3; ++i)
        for (int d : {-1, 1}) {
            ApTriple y = x;
            y[i] += d;
            if (y[i] < 0 || y[i] > length) continue;
            if (cost(y) < fx) return false;
        }
    return true;
}

} // namespace

TEST_CASE("separable surrogate is minimised exactly", "[hj]") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> pos(0, 1500);
    for (int trial = 0; trial < 50; ++trial) {
        const ApTriple t{pos(rng), pos(rng), pos(rng)};
        auto cost = [&](const ApTriple& x) {
            return std::abs(x[0] - t[0]) + std::abs(x[1] - t[1]) + std::abs(x[2] - t[2]);
        };
        const auto r = hooke_jeeves(ApTriple{0, 500, 1000}, 1500, cost);
        REQUIRE(r.positions == t);
        REQUIRE(r.cost == 0.0);
        REQUIRE_FALSE(r.budget_exhausted);
    }
}

TEST_CASE("a one-step local optimum is a fixed point", "[hj]") {
    const ApTriple t{3, 40, 77};
    auto cost = [&](const ApTriple& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += (x[i] - t[i]) * (x[i] - t[i]);
        return s;
    };
    const auto r = hooke_jeeves(t, 100, cost);
    CHECK(r.positions == t);
    CHECK(r.accepted_costs.size() == 1);
}

TEST_CASE("accepted costs decrease strictly and probes stay in range", "[hj][property]") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(9);
    for (auto& v : w) v = u(rng);
    bool inside = true;
    auto cost = [&](const ApTriple& x) {
        for (int v : x) inside = inside && v >= 0 && v <= 300;
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += std::sin(0.05 * x[i] * w[i]) * w[i + 3] + 1e-4 * (x[i] - 150.0 * (1.0 + w[i + 6])) * (x[i] - 150.0);
        return s;
    };
    const auto r = hooke_jeeves(ApTriple{0, 100, 200}, 300, cost);
    CHECK(inside);
    for (std::size_t k = 1; k < r.accepted_costs.size(); ++k) REQUIRE(r.accepted_costs[k] < r.accepted_costs[k - 1]);
    CHECK(r.accepted_costs.back() == r.cost);
    CHECK(r.cost <= cost(ApTriple{0, 100, 200}));
    CHECK(is_local_minimum(r.positions, 300, cost));
    CHECK(r.final_step_m == 1);
}

TEST_CASE("evaluation budget stops the search", "[hj]") {
    int calls = 0;
    auto cost = [&](const ApTriple& x) {
        ++calls;
        return std::abs(x[0] - 700) + std::abs(x[1] - 900) + std::abs(x[2] - 1100);
    };
    HjConfig cfg;
    cfg.max_evals = 15;
    const auto r = hooke_jeeves(ApTriple{0, 500, 1000}, 1500, cost, cfg);
    CHECK(r.evals == 15);
    CHECK(calls == 15);
    CHECK(r.budget_exhausted);
}

TEST_CASE("invalid starts and configs are rejected", "[hj]") {
    auto cost = [](const ApTriple&) { return 0.0; };
    CHECK_THROWS_AS(hooke_jeeves(ApTriple{0, 50, 101}, 100, cost), DomainError);
    CHECK_THROWS_AS(hooke_jeeves(ApTriple{-1, 50, 60}, 100, cost), DomainError);
    HjConfig bad;
    bad.min_step_m = 0;
    CHECK_THROWS_AS(hooke_jeeves(ApTriple{0, 50, 60}, 100, cost, bad), ConfigError);
    bad = HjConfig{};
    bad.initial_step_m = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("HJ on a small synthetic tunnel ends at a local minimum", "[hj]") {
    TunnelGeometry g;
    g.length_m = 100.0;
    const auto map = build_synthetic_map(g, AntennaConfig{}, ReceiverGrid::for_length(100.0, 0.5), SyntheticModelParams{});
    const CostConfig cc;
    const auto r = hooke_jeeves(ApTriple{0, 33, 66}, map, cc);
    auto cost = [&](const ApTriple& x) { return combined_cost(x, map, cc); };
    CHECK(r.cost == cost(r.positions));
    CHECK(is_local_minimum(r.positions, 100, cost));
    const auto again = hooke_jeeves(ApTriple{0, 33, 66}, map, cc);
    CHECK(again.positions == r.positions);
    CHECK(again.evals == r.evals);
}
