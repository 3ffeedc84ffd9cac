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


#include <apopt/channel.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace apopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TunnelGeometry short_tunnel(double length) {
    TunnelGeometry g;
    g.length_m = length;
    return g;
}

// Closed-form model written out independently of the library.
double model_oracle(double d) {
    const double ref = 32.4 + 20.0 * std::log10(2400.0) + 20.0 * std::log10(0.001);
    const double lin = (0.02 + 10.0 / 477.5) * d;
    const double lg = 18.0 * std::log10(std::max(d, 1.0));
    const double rip = 3.0 * std::sin(2.0 * std::numbers::pi * d / 37.0) * std::cos(2.0 * std::numbers::pi * d / 11.0);
    return ref - 60.0 + lin + lg + rip;
}

PathLossMap three_profile_map() {
    const auto geo = short_tunnel(2.0);
    const auto grid = ReceiverGrid::for_length(2.0, 0.5);
    PathLossMap m(geo, grid);
    m.insert({0, {1.0, 2.5, 3.25, 4.125, 5.0}});
    m.insert({1, {-1.5, 0.0, 10.0, 20.000001, 30.5}});
    m.insert({2, {7.0, 6.0, 5.0, 4.0, 3.0}});
    return m;
}

} // namespace

TEST_CASE("path loss from powers", "[channel]") {
    STATIC_REQUIRE(path_loss_from_power(30.0, 30.0) == 0.0);
    STATIC_REQUIRE(path_loss_from_power(30.0, -70.0) == 100.0);
    STATIC_REQUIRE(path_loss_from_power(0.0, 20.0) == -20.0);
}

TEST_CASE("receiver grid count", "[channel]") {
    CHECK(ReceiverGrid::count_for(1500.0, 0.1) == 15001);
    CHECK(ReceiverGrid::count_for(0.3, 0.1) == 4);
    CHECK(ReceiverGrid::count_for(100.0, 0.5) == 201);
    CHECK_THROWS_AS(ReceiverGrid::count_for(10.0, 0.0), ConfigError);
    const auto grid = ReceiverGrid::for_length(10.0, 0.1);
    CHECK_NOTHROW(grid.validate(short_tunnel(10.0)));
    CHECK_THROWS_AS(grid.validate(short_tunnel(11.0)), ConfigError);
}

TEST_CASE("synthetic profile at the AP equals the reference level", "[channel]") {
    AntennaConfig ant;
    SyntheticModelParams p;
    p.level_offset_db = 0.0;
    CHECK(synthetic_path_loss_db(0.0, 477.5, ant, p) == free_space_reference_db(ant.frequency_hz, p.d0_m));
    p.level_offset_db = -60.0;
    CHECK_THAT(synthetic_path_loss_db(0.0, 477.5, ant, p),
               WithinAbs(free_space_reference_db(ant.frequency_hz, p.d0_m) - 60.0, 1e-12));
    CHECK_THAT(free_space_reference_db(2.4e9, 1.0), WithinAbs(40.0042, 1e-4));
}

TEST_CASE("synthetic profile matches the closed form", "[channel]") {
    const TunnelGeometry geo;
    const AntennaConfig ant;
    const SyntheticModelParams p;
    const auto grid = ReceiverGrid::for_length(geo.length_m, 0.1);
    const auto prof = synth_profile(0, geo, ant, grid, p);
    REQUIRE(prof.values.size() == 15001);
    CHECK_THAT(prof.values[10000], WithinRel(model_oracle(1000.0), 1e-12));
    for (std::size_t i : {0u, 7u, 123u, 5000u, 14999u})
        CHECK_THAT(prof.values[i], WithinAbs(model_oracle(grid.position(i)), 1e-9));
}

TEST_CASE("synthetic profile is symmetric about the AP", "[channel]") {
    const TunnelGeometry geo;
    const auto grid = ReceiverGrid::for_length(geo.length_m, 0.1);
    const auto prof = synth_profile(700, geo, AntennaConfig{}, grid, SyntheticModelParams{});
    for (std::size_t k : {1u, 10u, 55u, 3000u}) CHECK_THAT(prof.values[7000 - k], WithinAbs(prof.values[7000 + k], 1e-9));
}

TEST_CASE("without ripple the profile is nondecreasing beyond d0", "[channel]") {
    SyntheticModelParams p;
    p.ripple_amplitude_db = 0.0;
    const AntennaConfig ant;
    double prev = synthetic_path_loss_db(1.0, 477.5, ant, p);
    for (double d = 1.05; d < 1500.0; d += 0.05) {
        const double v = synthetic_path_loss_db(d, 477.5, ant, p);
        REQUIRE(v >= prev);
        prev = v;
    }
}

TEST_CASE("synth_profile is pure and range-checked", "[channel]") {
    const auto geo = short_tunnel(50.0);
    const auto grid = ReceiverGrid::for_length(50.0, 0.1);
    const auto a = synth_profile(20, geo, AntennaConfig{}, grid, SyntheticModelParams{});
    const auto b = synth_profile(20, geo, AntennaConfig{}, grid, SyntheticModelParams{});
    CHECK(a.values == b.values);
    CHECK_THROWS_AS(synth_profile(-1, geo, AntennaConfig{}, grid, SyntheticModelParams{}), DomainError);
    CHECK_THROWS_AS(synth_profile(51, geo, AntennaConfig{}, grid, SyntheticModelParams{}), DomainError);
    CHECK_NOTHROW(synth_profile(50, geo, AntennaConfig{}, grid, SyntheticModelParams{}));
}

TEST_CASE("synthetic map covers every integer position", "[channel]") {
    const auto geo = short_tunnel(10.0);
    const auto map = build_synthetic_map(geo, AntennaConfig{}, ReceiverGrid::for_length(10.0, 0.1), SyntheticModelParams{});
    CHECK(map.size() == 11);
    CHECK(map.covers_all_integer_positions());
    const auto strided = build_synthetic_map(geo, AntennaConfig{}, ReceiverGrid::for_length(10.0, 0.1),
                                             SyntheticModelParams{}, 5);
    CHECK(strided.positions() == std::vector<int>{0, 5, 10});
    CHECK_FALSE(strided.covers_all_integer_positions());
}

TEST_CASE("combine_min takes the elementwise minimum", "[channel]") {
    PathLossMap m(short_tunnel(1.0), ReceiverGrid::for_length(1.0, 1.0));
    m.insert({0, {80.0, 10.0}});
    m.insert({1, {95.0, 5.0}});
    PathLossMap m3(short_tunnel(2.0), ReceiverGrid::for_length(2.0, 1.0));
    m3.insert({0, {80.0, 1.0, 2.0}});
    m3.insert({1, {95.0, 1.0, 2.0}});
    m3.insert({2, {70.0, 1.0, 2.0}});
    const int x[] = {0, 1, 2};
    CHECK(combine_min(x, m3)[0] == 70.0);

    const int single[] = {1};
    CHECK(combine_min(single, m) == m.at(1).values);
    const int dup[] = {1, 1, 1};
    CHECK(combine_min(dup, m) == m.at(1).values);
    const int missing[] = {0, 7};
    CHECK_THROWS_AS(combine_min(missing, m), LookupError);
    try {
        (void)combine_min(missing, m);
    } catch (const LookupError& e) {
        CHECK(e.position() == 7);
    }
}

TEST_CASE("combine_min is a lower bound and permutation invariant", "[channel][property]") {
    const auto geo = short_tunnel(30.0);
    const auto map = build_synthetic_map(geo, AntennaConfig{}, ReceiverGrid::for_length(30.0, 0.5), SyntheticModelParams{});
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pos(0, 30);
    for (int trial = 0; trial < 200; ++trial) {
        const int x[] = {pos(rng), pos(rng), pos(rng)};
        const int y[] = {x[2], x[0], x[1]};
        const auto c = combine_min(x, map);
        CHECK(c == combine_min(y, map));
        for (int j : x)
            for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(c[i] <= map.at(j).values[i]);
    }
}

TEST_CASE("map insert validates profiles", "[channel]") {
    PathLossMap m(short_tunnel(2.0), ReceiverGrid::for_length(2.0, 1.0));
    CHECK_THROWS_AS(m.insert({0, {1.0, 2.0}}), DomainError);
    CHECK_THROWS_AS(m.insert({3, {1.0, 2.0, 3.0}}), DomainError);
    CHECK_THROWS_AS(m.insert({0, {1.0, std::nan(""), 3.0}}), DomainError);
    CHECK_THROWS_AS(m.at(0), LookupError);
}

TEST_CASE("map CSV round trip is exact at six decimals", "[channel][io]") {
    const auto m = three_profile_map();
    std::ostringstream os;
    write_map_csv(os, m);
    const std::string text = os.str();
    CHECK(text.rfind("ap_position_m,receiver_index,path_loss_db\n0,0,1.000000\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream is(text);
    const auto back = read_map_csv(is, 0.5);
    CHECK(back == m);

    std::ostringstream again;
    write_map_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("synthetic map survives save and load through a file", "[channel][io]") {
    const auto geo = short_tunnel(5.0);
    const auto map = build_synthetic_map(geo, AntennaConfig{}, ReceiverGrid::for_length(5.0, 0.1), SyntheticModelParams{});
    const auto path = (std::filesystem::temp_directory_path() / "apopt_test_map.csv").string();
    save_map(map, path);
    const auto back = load_map(path, 0.1);
    REQUIRE(back.size() == map.size());
    for (int p : map.positions())
        for (std::size_t i = 0; i < map.grid().count; ++i)
            REQUIRE_THAT(back.at(p).values[i], WithinAbs(map.at(p).values[i], 5e-7));
    // A second pass through the text form is the identity.
    save_map(back, path);
    CHECK(load_map(path, 0.1) == back);
    std::filesystem::remove(path);
}

namespace {

std::size_t error_line(const std::string& text) {
    std::istringstream is(text);
    try {
        (void)read_map_csv(is, 1.0);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST_CASE("malformed map CSV is rejected with the line number", "[channel][io]") {
    const std::string head = "ap_position_m,receiver_index,path_loss_db\n";
    CHECK(error_line("ap,idx,pl\n0,0,1\n") == 1);
    CHECK(error_line(head + "0,0,1.0\n0,1,abc\n") == 3);
    CHECK(error_line(head + "0,0,1.0\n0,1\n") == 3);
    CHECK(error_line(head + "0,0,1.0\n0,1,2.0\n1,0,1.0\n1,1,2.0\n0,0,5.0\n0,1,5.0\n") == 6);
    CHECK(error_line(head + "0,0,1.0\n0,2,2.0\n") == 3);
    // duplicate AP position after its block closed
    CHECK(error_line(head + "0,0,1.0\n0,1,2.0\n1,0,1.0\n1,1,2.0\n1,0,3.0\n") > 0);

    std::istringstream short_profile(head + "0,0,1.0\n0,1,2.0\n1,0,1.0\n");
    try {
        (void)read_map_csv(short_profile, 1.0);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("expected grid count 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_map("/nonexistent/map.csv", 0.1), ParseError);
}
