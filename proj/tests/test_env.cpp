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


#include <apopt/env.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace apopt;

namespace {

const PathLossMap& small_map() {
    static const PathLossMap map = [] {
        TunnelGeometry g;
        g.length_m = 60.0;
        return build_synthetic_map(g, AntennaConfig{}, ReceiverGrid::for_length(60.0, 0.5), SyntheticModelParams{});
    }();
    return map;
}

EnvConfig small_env() {
    EnvConfig e;
    e.length_m = 60;
    e.initial_positions = {0, 20, 40};
    return e;
}

} // namespace

TEST_CASE("action codec examples", "[env]") {
    CHECK(encode({-1, -1, -1}) == 0);
    CHECK(encode({1, 1, 1}) == 26);
    CHECK(encode({0, 0, 0}) == 13);
    CHECK(decode(0) == Action{-1, -1, -1});
    CHECK(decode(13) == Action{0, 0, 0});
    CHECK(decode(26) == Action{1, 1, 1});
    CHECK(decode(5) == Action{-1, 0, 1});
}

TEST_CASE("action codec is a bijection", "[env]") {
    for (int i = 0; i < kActionCount; ++i) REQUIRE(encode(decode(i)) == i);
    for (int a1 = -1; a1 <= 1; ++a1)
        for (int a2 = -1; a2 <= 1; ++a2)
            for (int a3 = -1; a3 <= 1; ++a3) REQUIRE(decode(encode({a1, a2, a3})) == Action{a1, a2, a3});
}

TEST_CASE("action codec rejects invalid input", "[env]") {
    CHECK_THROWS_AS(decode(-1), DomainError);
    CHECK_THROWS_AS(decode(27), DomainError);
    CHECK_THROWS_AS(encode({2, 0, 0}), DomainError);
}

TEST_CASE("reset places APs at the initial positions", "[env]") {
    const EnvConfig defaults;
    CHECK(defaults.initial_positions == ApTriple{0, 500, 1000});
    const auto e = small_env();
    const auto s = reset(e, small_map(), CostConfig{});
    CHECK(s.positions == e.initial_positions);
    CHECK(s.cost == combined_cost(e.initial_positions, small_map(), CostConfig{}));
    CHECK(reset(e, small_map(), CostConfig{}) == s);

    auto same = e;
    same.initial_positions = {0, 0, 0};
    const int one[] = {0};
    CHECK(reset(same, small_map(), CostConfig{}).cost == combined_cost(one, small_map(), CostConfig{}));
}

TEST_CASE("step clips, rewards and terminates", "[env]") {
    const auto e = small_env();
    const CostConfig cc;
    const auto s = reset(e, small_map(), cc);

    const auto left = step(s, encode({-1, 0, 0}), small_map(), cc, e);
    CHECK(left.next.positions[0] == 0);

    const auto stay = step(s, encode({0, 0, 0}), small_map(), cc, e);
    CHECK(stay.next == s);
    CHECK(stay.reward == -s.cost);

    const auto up = step(s, encode({1, 1, 1}), small_map(), cc, e);
    CHECK(up.next.positions == ApTriple{1, 21, 41});
    CHECK(up.reward == -combined_cost(ApTriple{1, 21, 41}, small_map(), cc));

    auto top = State{{60, 60, 60}, 0.0};
    CHECK(step(top, encode({1, 1, 1}), small_map(), cc, e).next.positions == ApTriple{60, 60, 60});

    auto lenient = e;
    lenient.terminate_threshold = 1e9;
    CHECK(step(s, 13, small_map(), cc, lenient).done);
    auto strict = e;
    strict.terminate_threshold = s.cost;
    CHECK_FALSE(step(s, 13, small_map(), cc, strict).done);
}

TEST_CASE("step invariants under random walks", "[env][property]") {
    const auto e = small_env();
    const CostConfig cc;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> action(0, kActionCount - 1);
    auto s = reset(e, small_map(), cc);
    for (int t = 0; t < 5000; ++t) {
        const auto r = step(s, action(rng), small_map(), cc, e);
        for (int x : r.next.positions) REQUIRE((x >= 0 && x <= e.length_m));
        REQUIRE(r.reward == -r.next.cost);
        REQUIRE(r.done == (r.next.cost < e.terminate_threshold));
        REQUIRE(r.next.cost == combined_cost(r.next.positions, small_map(), cc));
        s = r.next;
    }
}

TEST_CASE("larger steps move by step_m", "[env]") {
    auto e = small_env();
    e.step_m = 5;
    const auto s = reset(e, small_map(), CostConfig{});
    CHECK(step(s, encode({1, -1, 0}), small_map(), CostConfig{}, e).next.positions == ApTriple{5, 15, 40});
}

TEST_CASE("network input normalisation", "[env]") {
    EnvConfig e;
    const State s{{0, 750, 1500}, 150.0};
    const auto n = normalize(s, e);
    CHECK(n[0] == 0.0);
    CHECK(n[1] == 0.5);
    CHECK(n[2] == 1.0);
    CHECK(n[3] == 0.5);
}

TEST_CASE("environment config validation", "[env]") {
    EnvConfig e;
    e.step_m = 0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = EnvConfig{};
    e.initial_positions = {0, 500, 1600};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = small_env();
    e.length_m = 100;
    CHECK_THROWS_AS(TunnelEnv(small_map(), CostConfig{}, e), ConfigError);
}

TEST_CASE("TunnelEnv wraps the free functions", "[env]") {
    const TunnelEnv env(small_map(), CostConfig{}, small_env());
    const auto s = env.reset();
    const auto r = env.step(s, 26);
    CHECK(r.next == step(s, 26, small_map(), CostConfig{}, small_env()).next);
    CHECK(env.observe(s) == normalize(s, small_env()));
    CHECK(env.cost(s.positions) == s.cost);
}
