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

#include "errors.hpp"
#include "io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace apopt {

/// Tunnel description. Only length_m and curvature_radius_m influence the synthetic
/// model; the wall constants and mounting offsets are carried for provenance.
struct TunnelGeometry {
    double length_m = 1500.0;
    double curvature_radius_m = 477.5;
    double rel_permittivity = 5.0;
    double conductivity_s_per_m = 0.01;
    double ap_height_m = 3.0;
    double ap_wall_offset_m = 0.5;

    void validate() const {
        detail::require_config(length_m > 0.0 && std::isfinite(length_m), "geometry.length_m must be > 0");
        detail::require_config(curvature_radius_m > 0.0, "geometry.curvature_radius_m must be > 0");
        detail::require_config(rel_permittivity >= 1.0, "geometry.rel_permittivity must be >= 1");
        detail::require_config(conductivity_s_per_m >= 0.0, "geometry.conductivity_s_per_m must be >= 0");
    }
};

struct AntennaConfig {
    double tx_power_dbm = 20.0;
    double tx_gain_dbi = 7.0;
    double frequency_hz = 2.4e9;

    void validate() const {
        detail::require_config(frequency_hz > 0.0 && std::isfinite(frequency_hz), "antenna.frequency_hz must be > 0");
        detail::require_config(std::isfinite(tx_power_dbm) && std::isfinite(tx_gain_dbi), "antenna values must be finite");
    }
};

/// Receivers sit at i * spacing_m along the tunnel axis, i = 0 .. count-1.
struct ReceiverGrid {
    double spacing_m = 0.1;
    std::size_t count = 15001;

    static std::size_t count_for(double length_m, double spacing_m) {
        detail::require_config(spacing_m > 0.0, "grid.spacing_m must be > 0");
        // The epsilon absorbs representation error in length/spacing (0.3/0.1 = 2.999...).
        return static_cast<std::size_t>(std::floor(length_m / spacing_m + 1e-9)) + 1;
    }

    static ReceiverGrid for_length(double length_m, double spacing_m) {
        return ReceiverGrid{spacing_m, count_for(length_m, spacing_m)};
    }

    double position(std::size_t i) const { return static_cast<double>(i) * spacing_m; }

    void validate(const TunnelGeometry& geometry) const {
        detail::require_config(spacing_m > 0.0, "grid.spacing_m must be > 0");
        detail::require_config(count >= 2, "grid.count must be >= 2");
        detail::require_config(count == count_for(geometry.length_m, spacing_m),
                               "grid.count inconsistent with geometry length (expected " +
                                   std::to_string(count_for(geometry.length_m, spacing_m)) + ")");
    }

    friend bool operator==(const ReceiverGrid&, const ReceiverGrid&) = default;
};

/// Closed-form stand-in for a full-wave tunnel propagation solver:
///
///   PL(d) = PL_ref + level_offset + (a_wg + k/R) d + 10 n log10(max(d, d0) / d0) + ripple(d)
///   ripple(d) = A sin(2 pi d / period1) cos(2 pi d / period2)
///
/// with PL_ref the free-space loss at d0 and d the along-axis distance to the AP.
/// The ripple periods are incommensurate so the fading pattern never repeats
/// within a tunnel. level_offset shifts the whole profile onto the relative dB
/// scale the coverage threshold is expressed in.
struct SyntheticModelParams {
    double d0_m = 1.0;
    double waveguide_atten_db_per_m = 0.02;
    double exponent = 1.8;
    double curvature_k_db_m = 10.0;
    double ripple_amplitude_db = 3.0;
    double ripple_period1_m = 37.0;
    double ripple_period2_m = 11.0;
    double level_offset_db = -60.0;

    void validate() const {
        detail::require_config(d0_m > 0.0, "model.d0_m must be > 0");
        detail::require_config(waveguide_atten_db_per_m >= 0.0, "model.waveguide_atten_db_per_m must be >= 0");
        detail::require_config(exponent >= 0.0, "model.exponent must be >= 0");
        detail::require_config(curvature_k_db_m >= 0.0, "model.curvature_k_db_m must be >= 0");
        detail::require_config(ripple_amplitude_db >= 0.0, "model.ripple_amplitude_db must be >= 0");
        detail::require_config(ripple_period1_m > 0.0 && ripple_period2_m > 0.0, "model ripple periods must be > 0");
        detail::require_config(std::isfinite(level_offset_db), "model.level_offset_db must be finite");
    }
};

/// Free-space path loss in dB at distance d0: 32.4 + 20 log10(f_MHz) + 20 log10(d0_km).
inline double free_space_reference_db(double frequency_hz, double d0_m) {
    return 32.4 + 20.0 * std::log10(frequency_hz / 1e6) + 20.0 * std::log10(d0_m / 1000.0);
}

/// Path loss of the synthetic model at along-axis distance d from the AP.
inline double synthetic_path_loss_db(double distance_m, double curvature_radius_m, const AntennaConfig& antenna,
                                     const SyntheticModelParams& p) {
    const double d = std::abs(distance_m);
    const double two_pi = 2.0 * std::numbers::pi;
    const double linear = (p.waveguide_atten_db_per_m + p.curvature_k_db_m / curvature_radius_m) * d;
    const double log_term = 10.0 * p.exponent * std::log10(std::max(d, p.d0_m) / p.d0_m);
    const double ripple =
        p.ripple_amplitude_db * std::sin(two_pi * d / p.ripple_period1_m) * std::cos(two_pi * d / p.ripple_period2_m);
    return free_space_reference_db(antenna.frequency_hz, p.d0_m) + p.level_offset_db + linear + log_term + ripple;
}

/// pl = P0 - P_rx, both in dB(m).
constexpr double path_loss_from_power(double p0_dbm, double p_rx_dbm) { return p0_dbm - p_rx_dbm; }

struct PathLossProfile {
    int ap_position_m = 0;
    std::vector<double> values;

    friend bool operator==(const PathLossProfile&, const PathLossProfile&) = default;
};

inline PathLossProfile synth_profile(int ap_pos, const TunnelGeometry& geometry, const AntennaConfig& antenna,
                                     const ReceiverGrid& grid, const SyntheticModelParams& params) {
    if (ap_pos < 0 || static_cast<double>(ap_pos) > geometry.length_m)
        throw DomainError("AP position " + std::to_string(ap_pos) + " m outside [0, " +
                          std::to_string(geometry.length_m) + "]");
    PathLossProfile out{ap_pos, std::vector<double>(grid.count)};
    for (std::size_t i = 0; i < grid.count; ++i)
        out.values[i] = synthetic_path_loss_db(grid.position(i) - ap_pos, geometry.curvature_radius_m, antenna, params);
    return out;
}

/// AP positions j -> path-loss profile over a shared receiver grid.
class PathLossMap {
public:
    PathLossMap() = default;
    PathLossMap(TunnelGeometry geometry, ReceiverGrid grid) : geometry_(geometry), grid_(grid) {
        detail::require_config(grid_.spacing_m > 0.0 && grid_.count >= 2, "path-loss map grid needs >= 2 receivers");
    }

    const TunnelGeometry& geometry() const noexcept { return geometry_; }
    const ReceiverGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return profiles_.size(); }
    bool empty() const noexcept { return profiles_.empty(); }
    bool contains(int position) const { return profiles_.contains(position); }

    void insert(PathLossProfile profile) {
        if (profile.ap_position_m < 0 || static_cast<double>(profile.ap_position_m) > geometry_.length_m)
            throw DomainError("profile AP position " + std::to_string(profile.ap_position_m) + " outside tunnel");
        if (profile.values.size() != grid_.count)
            throw DomainError("profile at " + std::to_string(profile.ap_position_m) + " m has " +
                              std::to_string(profile.values.size()) + " values, expected grid count " +
                              std::to_string(grid_.count));
        for (double v : profile.values)
            if (!std::isfinite(v))
                throw DomainError("profile at " + std::to_string(profile.ap_position_m) + " m has non-finite value");
        const int key = profile.ap_position_m;
        profiles_.insert_or_assign(key, std::move(profile));
    }

    const PathLossProfile& at(int position) const {
        auto it = profiles_.find(position);
        if (it == profiles_.end())
            throw LookupError("no path-loss profile for AP position " + std::to_string(position) + " m", position);
        return it->second;
    }

    std::vector<int> positions() const {
        std::vector<int> out;
        out.reserve(profiles_.size());
        for (const auto& [pos, _] : profiles_) out.push_back(pos);
        return out;
    }

    const std::map<int, PathLossProfile>& profiles() const noexcept { return profiles_; }

    /// True when every integer position 0..floor(L) has a profile.
    bool covers_all_integer_positions() const {
        const int last = static_cast<int>(std::floor(geometry_.length_m + 1e-9));
        for (int p = 0; p <= last; ++p)
            if (!profiles_.contains(p)) return false;
        return true;
    }

    friend bool operator==(const PathLossMap& a, const PathLossMap& b) {
        return a.grid_ == b.grid_ && a.profiles_ == b.profiles_;
    }

private:
    TunnelGeometry geometry_{};
    ReceiverGrid grid_{};
    std::map<int, PathLossProfile> profiles_;
};

/// Map with a synthetic profile for every integer AP position in [first, last] stepping by stride.
inline PathLossMap build_synthetic_map(const TunnelGeometry& geometry, const AntennaConfig& antenna,
                                       const ReceiverGrid& grid, const SyntheticModelParams& params, int stride = 1) {
    geometry.validate();
    antenna.validate();
    grid.validate(geometry);
    params.validate();
    detail::require_config(stride >= 1, "map stride must be >= 1");
    PathLossMap map(geometry, grid);
    const int last = static_cast<int>(std::floor(geometry.length_m + 1e-9));
    for (int p = 0; p <= last; p += stride) map.insert(synth_profile(p, geometry, antenna, grid, params));
    return map;
}

/// PL_i(X) = min_j pl_{i,j}(x_j).
inline std::vector<double> combine_min(std::span<const int> positions, const PathLossMap& map) {
    detail::require(!positions.empty(), "combine_min needs at least one AP position");
    std::vector<double> out = map.at(positions[0]).values;
    for (std::size_t j = 1; j < positions.size(); ++j) {
        const auto& v = map.at(positions[j]).values;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], v[i]);
    }
    return out;
}

// ---- CSV persistence ---------------------------------------------------

inline constexpr std::string_view kMapCsvHeader = "ap_position_m,receiver_index,path_loss_db";

namespace detail {

template <class T>
bool parse_field(std::string_view field, T& out) {
    if (field.empty()) return false;
    auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    return res.ec == std::errc{} && res.ptr == field.data() + field.size();
}

} // namespace detail

/// Writes the CSV form: header line, then one row per (AP, receiver) sorted by AP
/// then receiver index, values with exactly six decimals, LF endings.
inline void write_map_csv(std::ostream& os, const PathLossMap& map) {
    std::string line;
    os << kMapCsvHeader << '\n';
    for (const auto& [pos, profile] : map.profiles()) {
        const std::string prefix = std::to_string(pos) + ",";
        for (std::size_t i = 0; i < profile.values.size(); ++i) {
            line.assign(prefix);
            line += std::to_string(i);
            line += ',';
            io::append_fixed(line, profile.values[i], 6);
            line += '\n';
            os << line;
        }
    }
}

inline void save_map(const PathLossMap& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_map_csv(os, map);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

/// Parses the CSV form. The file carries no spacing, so the receiver spacing is
/// supplied by the caller; the grid count is taken from the first profile and the
/// tunnel length is (count - 1) * spacing.
inline PathLossMap read_map_csv(std::istream& is, double spacing_m = 0.1) {
    detail::require_config(spacing_m > 0.0, "grid spacing must be > 0");
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw ParseError("empty file, expected header", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMapCsvHeader) throw ParseError("bad header '" + line + "'", line_no);

    std::vector<PathLossProfile> profiles;
    std::size_t expected_count = 0;
    auto close_profile = [&](std::size_t at_line) {
        if (profiles.empty()) return;
        const auto& last = profiles.back();
        if (expected_count == 0) {
            expected_count = last.values.size();
        } else if (last.values.size() != expected_count) {
            throw ParseError("profile for AP " + std::to_string(last.ap_position_m) + " has " +
                                 std::to_string(last.values.size()) + " receivers, expected grid count " +
                                 std::to_string(expected_count),
                             at_line);
        }
    };

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view sv(line);
        const auto c1 = sv.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
        if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos)
            throw ParseError("expected 3 comma-separated fields", line_no);
        int ap = 0;
        std::size_t idx = 0;
        double pl = 0.0;
        if (!detail::parse_field(sv.substr(0, c1), ap)) throw ParseError("bad ap_position_m", line_no);
        if (!detail::parse_field(sv.substr(c1 + 1, c2 - c1 - 1), idx)) throw ParseError("bad receiver_index", line_no);
        if (!detail::parse_field(sv.substr(c2 + 1), pl) || !std::isfinite(pl))
            throw ParseError("bad path_loss_db '" + std::string(sv.substr(c2 + 1)) + "'", line_no);

        if (profiles.empty() || profiles.back().ap_position_m != ap) {
            close_profile(line_no);
            for (const auto& p : profiles)
                if (p.ap_position_m == ap) throw ParseError("duplicate AP position " + std::to_string(ap), line_no);
            if (!profiles.empty() && ap < profiles.back().ap_position_m)
                throw ParseError("rows not sorted by ap_position_m", line_no);
            if (ap < 0) throw ParseError("negative ap_position_m", line_no);
            profiles.push_back(PathLossProfile{ap, {}});
        }
        auto& cur = profiles.back();
        if (idx != cur.values.size())
            throw ParseError("receiver_index " + std::to_string(idx) + " out of sequence for AP " + std::to_string(ap) +
                                 " (expected " + std::to_string(cur.values.size()) + ")",
                             line_no);
        if (expected_count != 0 && idx >= expected_count)
            throw ParseError("receiver_index " + std::to_string(idx) + " exceeds expected grid count " +
                                 std::to_string(expected_count),
                             line_no);
        cur.values.push_back(pl);
    }
    close_profile(line_no);
    if (profiles.empty()) throw ParseError("no data rows", line_no);
    if (expected_count < 2) throw ParseError("grid needs at least 2 receivers", line_no);

    TunnelGeometry geometry;
    geometry.length_m = static_cast<double>(expected_count - 1) * spacing_m;
    PathLossMap map(geometry, ReceiverGrid{spacing_m, expected_count});
    for (auto& p : profiles) {
        if (static_cast<double>(p.ap_position_m) > geometry.length_m + 1e-9)
            throw ParseError("AP position " + std::to_string(p.ap_position_m) + " beyond tunnel length", 0);
        map.insert(std::move(p));
    }
    return map;
}

inline PathLossMap load_map(const std::string& path, double spacing_m = 0.1) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open '" + path + "'", 0);
    return read_map_csv(is, spacing_m);
}

} // namespace apopt
