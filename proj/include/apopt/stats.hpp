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

// Distribution summaries of per-receiver path loss for before/after comparisons.

#include "channel.hpp"
#include "cost.hpp"
#include "errors.hpp"
#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace apopt {

struct HistogramBin {
    double lower_db = 0.0;
    double upper_db = 0.0;
    std::size_t count = 0;
    double mass = 0.0;      // count / total
    double density = 0.0;   // mass / bin width
};

/// Histogram with fixed-width bins starting at floor(min / width) * width.
/// The last bin is closed on the right so the maximum is always counted.
inline std::vector<HistogramBin> histogram_pdf(std::span<const double> values, double bin_width_db = 1.0) {
    detail::require(!values.empty(), "histogram of empty data");
    detail::require(bin_width_db > 0.0, "bin width must be > 0");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = std::floor(*lo_it / bin_width_db) * bin_width_db;
    const auto n_bins = static_cast<std::size_t>(std::floor((*hi_it - lo) / bin_width_db)) + 1;
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].lower_db = lo + static_cast<double>(b) * bin_width_db;
        bins[b].upper_db = bins[b].lower_db + bin_width_db;
    }
    for (double v : values) {
        auto b = static_cast<std::size_t>(std::floor((v - lo) / bin_width_db));
        ++bins[std::min(b, n_bins - 1)].count;
    }
    const auto total = static_cast<double>(values.size());
    for (auto& b : bins) {
        b.mass = static_cast<double>(b.count) / total;
        b.density = b.mass / bin_width_db;
    }
    return bins;
}

struct CdfPoint {
    double value_db = 0.0;
    double probability = 0.0;  // fraction of samples <= value_db
};

/// Empirical CDF at each distinct sample value.
inline std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
    detail::require(!values.empty(), "CDF of empty data");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::vector<CdfPoint> out;
    const auto n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        out.push_back({v[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

/// Empirical CDF evaluated at x.
inline double cdf_at(std::span<const CdfPoint> cdf, double x) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x, [](double a, const CdfPoint& p) { return a < p.value_db; });
    return it == cdf.begin() ? 0.0 : std::prev(it)->probability;
}

/// Received power P0 - PL per receiver.
inline std::vector<double> received_power_dbm(std::span<const double> path_loss_db, double tx_power_dbm) {
    std::vector<double> out(path_loss_db.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tx_power_dbm - path_loss_db[i];
    return out;
}

inline void write_pdf_csv(std::span<const HistogramBin> bins, const std::string& path) {
    io::CsvWriter csv(path, "bin_lower_db,bin_upper_db,count,mass,density");
    for (const auto& b : bins)
        csv.row({io::fixed(b.lower_db, 6), io::fixed(b.upper_db, 6), std::to_string(b.count), io::fixed(b.mass, 9),
                 io::fixed(b.density, 9)});
}

inline void write_cdf_csv(std::span<const CdfPoint> cdf, const std::string& path) {
    io::CsvWriter csv(path, "path_loss_db,cdf");
    for (const auto& p : cdf) csv.row({io::fixed(p.value_db, 6), io::fixed(p.probability, 9)});
}

/// receiver_index,position_m,path_loss_db,received_power_dbm for a placement.
inline void write_receiver_csv(std::span<const double> path_loss_db, const ReceiverGrid& grid, double tx_power_dbm,
                               const std::string& path) {
    io::CsvWriter csv(path, "receiver_index,position_m,path_loss_db,received_power_dbm");
    for (std::size_t i = 0; i < path_loss_db.size(); ++i)
        csv.row({std::to_string(i), io::fixed(grid.position(i), 6), io::fixed(path_loss_db[i], 6),
                 io::fixed(tx_power_dbm - path_loss_db[i], 6)});
}

} // namespace apopt
