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


#include <apopt/stats.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace apopt;
using Catch::Matchers::WithinAbs;

TEST_CASE("histogram bins have 1 dB width and unit mass", "[stats]") {
    const std::vector<double> v{10.2, 10.7, 11.0, 12.9, 13.0, 13.0};
    const auto bins = histogram_pdf(v, 1.0);
    REQUIRE(bins.size() == 4);
    CHECK(bins.front().lower_db == 10.0);
    CHECK(bins.back().upper_db == 14.0);
    CHECK(bins[0].count == 2);
    CHECK(bins[1].count == 1);
    CHECK(bins[2].count == 1);
    CHECK(bins[3].count == 2);
    double mass = 0.0;
    for (const auto& b : bins) mass += b.mass;
    CHECK_THAT(mass, WithinAbs(1.0, 1e-9));
    CHECK_THROWS_AS(histogram_pdf(std::vector<double>{}, 1.0), DomainError);
}

TEST_CASE("histogram mass sums to one on random data", "[stats][property]") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(40.0, 12.0);
    std::vector<double> v(10000);
    for (auto& x : v) x = n(rng);
    double mass = 0.0;
    for (const auto& b : histogram_pdf(v)) mass += b.mass;
    CHECK_THAT(mass, WithinAbs(1.0, 1e-9));
}

TEST_CASE("empirical CDF", "[stats]") {
    const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
    const auto cdf = empirical_cdf(v);
    REQUIRE(cdf.size() == 3);
    CHECK(cdf[0].probability == 0.25);
    CHECK(cdf[1].probability == 0.75);
    CHECK(cdf.back().probability == 1.0);
    CHECK(cdf_at(cdf, 0.5) == 0.0);
    CHECK(cdf_at(cdf, 2.0) == 0.75);
    CHECK(cdf_at(cdf, 99.0) == 1.0);
}

TEST_CASE("CDF at the median of a symmetric distribution", "[stats]") {
    std::vector<double> v;
    for (int k = -500; k <= 500; ++k) v.push_back(50.0 + 0.01 * k);
    const auto cdf = empirical_cdf(v);
    const auto bins = histogram_pdf(v, 1.0);
    // within one 1 dB bin of the median
    CHECK(std::abs(cdf_at(cdf, 50.0) - 0.5) <= bins[0].mass + bins[1].mass);
    CHECK(std::abs(cdf_at(cdf, 50.0) - 0.5) < 1e-3);
}

TEST_CASE("received power is transmit power minus path loss", "[stats]") {
    const std::vector<double> pl{30.0, 100.0};
    CHECK(received_power_dbm(pl, 30.0) == std::vector<double>{0.0, -70.0});
}
