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

// Experiment commands behind the apopt executable. Each command writes its
// outputs plus the resolved configuration (config.json) into an output directory.

#include "agents.hpp"
#include "cgan.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "cost.hpp"
#include "env.hpp"
#include "errors.hpp"
#include "hj.hpp"
#include "io.hpp"
#include "nn.hpp"
#include "stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apopt::cli {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// stderr logger; the level comes from APOPT_LOG (error|warn|info|debug, default info).
class Logger {
public:
    explicit Logger(LogLevel level = LogLevel::info) : level_(level) {}

    static Logger from_env() {
        const char* v = std::getenv("APOPT_LOG");
        if (v == nullptr) return Logger{};
        const std::string_view s{v};
        if (s == "error") return Logger{LogLevel::error};
        if (s == "warn") return Logger{LogLevel::warn};
        if (s == "debug") return Logger{LogLevel::debug};
        return Logger{};
    }

    void log(LogLevel l, std::string_view msg) const {
        static constexpr const char* names[] = {"error", "warn", "info", "debug"};
        if (l <= level_) std::cerr << "[apopt " << names[static_cast<int>(l)] << "] " << msg << '\n';
    }
    void info(std::string_view m) const { log(LogLevel::info, m); }
    void debug(std::string_view m) const { log(LogLevel::debug, m); }
    void warn(std::string_view m) const { log(LogLevel::warn, m); }

private:
    LogLevel level_;
};

struct Context {
    RunConfig config;
    std::filesystem::path out_dir = ".";
    std::optional<std::string> map_path;
    Logger log;

    std::string out(const std::string& name) const { return (out_dir / name).string(); }
};

inline void prepare_output(const Context& ctx) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + ctx.out_dir.string() + "'");
    io::write_text(ctx.out("config.json"), to_json(ctx.config).dump(2) + "\n");
}

inline PathLossMap simulate_map(const RunConfig& c) {
    return build_synthetic_map(c.geometry, c.antenna, c.grid(), c.model, c.run.map_stride_m);
}

/// Map from --map when given, else the synthetic model.
inline PathLossMap obtain_map(const Context& ctx) {
    if (ctx.map_path) {
        ctx.log.info("loading map " + *ctx.map_path);
        return load_map(*ctx.map_path, ctx.config.grid_spacing_m);
    }
    ctx.log.info("building synthetic map");
    return simulate_map(ctx.config);
}

inline EnvConfig env_for(const RunConfig& c, const PathLossMap& map) {
    EnvConfig e = c.env;
    e.length_m = static_cast<int>(std::floor(map.geometry().length_m + 1e-9));
    e.validate();
    return e;
}

inline std::string triple_text(const ApTriple& x) {
    return std::to_string(x[0]) + " " + std::to_string(x[1]) + " " + std::to_string(x[2]);
}

// ---- simulate ------------------------------------------------------------

inline void cmd_simulate(const Context& ctx) {
    prepare_output(ctx);
    const auto map = simulate_map(ctx.config);
    const auto path = ctx.out("map.csv");
    save_map(map, path);
    ctx.log.info("wrote " + std::to_string(map.size()) + " profiles to " + path);
}

// ---- single-method runs --------------------------------------------------

struct MethodResult {
    std::string method;
    std::uint64_t seed = 0;
    ApTriple initial_positions{};
    double initial_cost = 0.0;
    ApTriple positions{};
    double cost = 0.0;
};

inline nlohmann::json result_json(const MethodResult& r, const PathLossMap& map, const CostConfig& cc) {
    const auto terms = cost_terms(std::span<const int>(r.positions), map, cc);
    return {{"method", r.method},
            {"seed", r.seed},
            {"initial_positions", r.initial_positions},
            {"initial_cost", r.initial_cost},
            {"positions", r.positions},
            {"cost", r.cost},
            {"f1", terms.f1},
            {"f2", terms.f2},
            {"violations", terms.violations},
            {"percent_improvement", percent_improvement(r.initial_cost, r.cost)}};
}

inline MethodResult run_dqn(const PathLossMap& map, const RunConfig& c, nn::HeadKind kind, std::uint64_t seed,
                            const Logger& log, TrainingResult* full = nullptr) {
    TunnelEnv env(map, c.cost, env_for(c, map));
    Hyperparams hp = c.agent;
    hp.seed = seed;
    const std::string name = kind == nn::HeadKind::dueling ? "dueling_dqn" : "dqn";
    auto report = [&](const EpisodeTrace& t) {
        if (t.episode % 50 == 0)
            log.debug(name + " episode " + std::to_string(t.episode) + " best " + io::fixed(t.best_cost, 3));
    };
    auto res = train(env, kind, hp, report);
    MethodResult r{name, seed, res.initial_positions, res.initial_cost, res.best_positions, res.best_cost};
    if (full != nullptr) *full = std::move(res);
    return r;
}

inline MethodResult run_hj(const PathLossMap& map, const RunConfig& c) {
    const auto e = env_for(c, map);
    const auto res = hooke_jeeves(e.initial_positions, map, c.cost, c.hj);
    return {"hooke_jeeves", 0, e.initial_positions, combined_cost(e.initial_positions, map, c.cost), res.positions,
            res.cost};
}

inline void cmd_train(const Context& ctx, nn::HeadKind kind) {
    prepare_output(ctx);
    const auto map = obtain_map(ctx);
    TrainingResult full;
    const auto r = run_dqn(map, ctx.config, kind, ctx.config.run.seed, ctx.log, &full);
    auto doc = result_json(r, map, ctx.config.cost);
    doc["env_steps"] = full.env_steps;
    doc["gradient_steps"] = full.gradient_steps;
    doc["final_epsilon"] = full.final_epsilon;
    doc["selection"] = "lowest-cost state visited during training";
    doc["config"] = to_json(ctx.config);
    io::write_text(ctx.out("result.json"), doc.dump(2) + "\n");
    write_trace_csv(full.trace, ctx.out("trace.csv"));
    nn::save_checkpoint(nn::to_json(full.net), ctx.out("qnetwork.json"));
    ctx.log.info(r.method + ": " + io::fixed(r.initial_cost, 3) + " -> " + io::fixed(r.cost, 3) + " at " +
                 triple_text(r.positions));
}

inline void cmd_hj(const Context& ctx) {
    prepare_output(ctx);
    const auto map = obtain_map(ctx);
    const auto e = env_for(ctx.config, map);
    const auto res = hooke_jeeves(e.initial_positions, map, ctx.config.cost, ctx.config.hj);
    MethodResult r{"hooke_jeeves", 0, e.initial_positions, combined_cost(e.initial_positions, map, ctx.config.cost),
                   res.positions, res.cost};
    auto doc = result_json(r, map, ctx.config.cost);
    doc["evals"] = res.evals;
    doc["final_step_m"] = res.final_step_m;
    doc["budget_exhausted"] = res.budget_exhausted;
    doc["config"] = to_json(ctx.config);
    io::write_text(ctx.out("result.json"), doc.dump(2) + "\n");
    ctx.log.info("hooke_jeeves: " + io::fixed(r.initial_cost, 3) + " -> " + io::fixed(r.cost, 3) + " at " +
                 triple_text(r.positions));
}

// ---- compare -------------------------------------------------------------

inline constexpr std::string_view kCompareHeader =
    "method,seed,initial_cost,optimized_cost,percent_improvement,x1,x2,x3,f1,f2,violations";

inline void compare_row(io::CsvWriter& csv, const MethodResult& r, const PathLossMap& map, const CostConfig& cc) {
    const auto t = cost_terms(std::span<const int>(r.positions), map, cc);
    csv.row({r.method, std::to_string(r.seed), io::fixed(r.initial_cost, 6), io::fixed(r.cost, 6),
             io::fixed(percent_improvement(r.initial_cost, r.cost), 6), std::to_string(r.positions[0]),
             std::to_string(r.positions[1]), std::to_string(r.positions[2]), io::fixed(t.f1, 6), io::fixed(t.f2, 6),
             std::to_string(t.violations)});
}

/// Reported cost must equal the cost recomputed from the reported positions.
inline void verify_reported_cost(const MethodResult& r, const PathLossMap& map, const CostConfig& cc) {
    const double again = combined_cost(r.positions, map, cc);
    if (again != r.cost)
        throw std::runtime_error(r.method + " reported cost " + io::fixed(r.cost, 9) + " but its positions cost " +
                                 io::fixed(again, 9));
}

inline double median(std::vector<double> v) {
    detail::require(!v.empty(), "median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct CompareOutcome {
    std::vector<MethodResult> runs;
    double median_hj = 0.0;
    double median_dqn = 0.0;
    double median_dueling = 0.0;
};

/// HJ once (deterministic) and both DQN variants for run.seeds seeds starting at run.seed.
/// Writes compare.csv (one row per run) and compare_summary.csv (median per method).
inline CompareOutcome cmd_compare(const Context& ctx) {
    prepare_output(ctx);
    const auto map = obtain_map(ctx);
    const auto& c = ctx.config;
    CompareOutcome out;
    out.runs.push_back(run_hj(map, c));
    ctx.log.info("hooke_jeeves done: " + io::fixed(out.runs.back().cost, 3));
    for (int s = 0; s < c.run.seeds; ++s) {
        const std::uint64_t seed = c.run.seed + static_cast<std::uint64_t>(s);
        for (auto kind : {nn::HeadKind::plain, nn::HeadKind::dueling}) {
            out.runs.push_back(run_dqn(map, c, kind, seed, ctx.log));
            ctx.log.info(out.runs.back().method + " seed " + std::to_string(seed) + ": " +
                         io::fixed(out.runs.back().cost, 3));
        }
    }
    io::CsvWriter csv(ctx.out("compare.csv"), kCompareHeader);
    std::vector<double> hj, dqn, dueling;
    for (const auto& r : out.runs) {
        verify_reported_cost(r, map, c.cost);
        compare_row(csv, r, map, c.cost);
        (r.method == "hooke_jeeves" ? hj : r.method == "dqn" ? dqn : dueling).push_back(r.cost);
    }
    out.median_hj = median(hj);
    out.median_dqn = median(dqn);
    out.median_dueling = median(dueling);
    const double init = out.runs.front().initial_cost;
    io::CsvWriter summary(ctx.out("compare_summary.csv"),
                          "method,runs,initial_cost,median_optimized_cost,percent_improvement");
    auto srow = [&](const char* name, const std::vector<double>& v, double med) {
        summary.row({name, std::to_string(v.size()), io::fixed(init, 6), io::fixed(med, 6),
                     io::fixed(percent_improvement(init, med), 6)});
    };
    srow("hooke_jeeves", hj, out.median_hj);
    srow("dqn", dqn, out.median_dqn);
    srow("dueling_dqn", dueling, out.median_dueling);
    return out;
}

// ---- alpha sweep ---------------------------------------------------------

struct SweepRow {
    double alpha = 0.0;
    MethodResult result;
    CostTerms terms;
};

/// One Dueling DQN run per alpha; cost values in each row use that row's alpha.
inline std::vector<SweepRow> cmd_alpha_sweep(const Context& ctx) {
    prepare_output(ctx);
    const auto map = obtain_map(ctx);
    std::vector<SweepRow> rows;
    io::CsvWriter csv(ctx.out("alpha_sweep.csv"),
                      "alpha,x1,x2,x3,optimized_cost,initial_cost,percent_improvement,f1,f2");
    for (double a : ctx.config.run.alphas) {
        RunConfig c = ctx.config;
        c.cost.alpha = a;
        auto r = run_dqn(map, c, nn::HeadKind::dueling, c.run.seed, ctx.log);
        verify_reported_cost(r, map, c.cost);
        const auto t = cost_terms(std::span<const int>(r.positions), map, c.cost);
        csv.row({io::fixed(a, 6), std::to_string(r.positions[0]), std::to_string(r.positions[1]),
                 std::to_string(r.positions[2]), io::fixed(r.cost, 6), io::fixed(r.initial_cost, 6),
                 io::fixed(percent_improvement(r.initial_cost, r.cost), 6), io::fixed(t.f1, 6), io::fixed(t.f2, 6)});
        ctx.log.info("alpha " + io::fixed(a, 3) + ": " + io::fixed(r.cost, 3));
        rows.push_back({a, r, t});
    }
    return rows;
}

// ---- stats ---------------------------------------------------------------

/// PDF, CDF and per-receiver CSVs for the initial placement and, when given,
/// an optimized placement (files stats_initial_*.csv / stats_optimized_*.csv).
inline void cmd_stats(const Context& ctx, const std::optional<ApTriple>& optimized) {
    prepare_output(ctx);
    const auto map = obtain_map(ctx);
    auto emit = [&](const std::string& label, const ApTriple& x) {
        const auto pl = combine_min(std::span<const int>(x), map);
        write_pdf_csv(histogram_pdf(pl, 1.0), ctx.out("stats_" + label + "_pdf.csv"));
        write_cdf_csv(empirical_cdf(pl), ctx.out("stats_" + label + "_cdf.csv"));
        write_receiver_csv(pl, map.grid(), ctx.config.antenna.tx_power_dbm, ctx.out("stats_" + label + "_receivers.csv"));
    };
    emit("initial", env_for(ctx.config, map).initial_positions);
    if (optimized) emit("optimized", *optimized);
}

// ---- cGAN ----------------------------------------------------------------

/// Profiles of the map at positions that are multiples of stride.
inline PathLossMap subsample_map(const PathLossMap& map, int stride) {
    detail::require_config(stride >= 1, "subsample stride must be >= 1");
    PathLossMap out(map.geometry(), map.grid());
    for (const auto& [pos, profile] : map.profiles())
        if (pos % stride == 0) out.insert(profile);
    return out;
}

inline void write_cgan_trace_csv(const std::vector<cgan::EpochTrace>& trace, const std::string& path) {
    io::CsvWriter csv(path, "epoch,critic_loss,generator_adv_loss,generator_l1,val_mae");
    for (const auto& t : trace)
        csv.row({std::to_string(t.epoch), io::fixed(t.critic_loss, 9), io::fixed(t.generator_adv_loss, 9),
                 io::fixed(t.generator_l1, 9), std::isnan(t.val_mae) ? std::string("nan") : io::fixed(t.val_mae, 9)});
}

inline nlohmann::json error_metadata(const cgan::ErrorReport& r, const std::string& split) {
    return {{"split", split},
            {"pairs", r.rows.size()},
            {"mask", "1 for receivers at or beyond the AP position"},
            {"normalizer", "N = sum of mask entries per profile"},
            {"std", "population standard deviation over profiles"},
            {"percentile", "linear interpolation, rank = p/100 * (n - 1) over sorted values"},
            {"mse_db2", {{"mean", r.mse.mean}, {"std", r.mse.std}, {"p90", r.mse.p90}}},
            {"mae_db", {{"mean", r.mae.mean}, {"std", r.mae.std}, {"p90", r.mae.p90}}}};
}

/// Trains on every subsample_stride_m-th profile and writes the checkpoint
/// (cgan.json), epoch trace and error report for the validation split.
inline cgan::TrainResult cmd_cgan_train(const Context& ctx, bool write_dataset = false) {
    prepare_output(ctx);
    const auto& c = ctx.config;
    const auto source = obtain_map(ctx);
    const auto sub = subsample_map(source, c.run.subsample_stride_m);
    ctx.log.info("cGAN training on " + std::to_string(sub.size()) + " profiles");
    const auto ds = cgan::build_dataset(sub, c.cgan.downsample, c.run.seed, c.cgan.val_fraction);
    if (write_dataset) cgan::write_dataset_csv(ds, ctx.out("cgan_dataset.csv"));
    cgan::CganNets nets(c.cgan, c.run.seed);
    const double baseline = cgan::baseline_val_mae(ds);
    auto res = cgan::train_cgan(nets, ds, c.cgan.epochs, c.run.seed + 1, [&](const cgan::EpochTrace& t) {
        if (t.epoch % 10 == 0) ctx.log.debug("epoch " + std::to_string(t.epoch) + " val MAE " + io::fixed(t.val_mae, 4));
    });
    nn::save_checkpoint(cgan::to_json(nets), ctx.out("cgan.json"));
    write_cgan_trace_csv(res.trace, ctx.out("cgan_trace.csv"));
    const bool has_val = !ds.val.empty();
    const auto& pairs = has_val ? ds.val : ds.train;
    const auto report = cgan::error_report(nets, pairs, ds.sampling);
    cgan::write_error_rows_csv(report, ctx.out("error_report.csv"));
    cgan::write_error_summary_csv(report, ctx.out("error_summary.csv"));
    auto meta = error_metadata(report, has_val ? "val" : "train");
    meta["baseline_val_mae"] = baseline;
    io::write_text(ctx.out("error_summary.json"), meta.dump(2) + "\n");
    ctx.log.info("validation MAE " + io::fixed(report.mae.mean, 4) + " dB (skip-path baseline " +
                 io::fixed(baseline, 4) + " dB)");
    return res;
}

struct AugmentOutcome {
    std::size_t profiles = 0;
    std::optional<double> true_map_cost;
    std::optional<double> augmented_cost_on_true_map;
    std::optional<double> gap_pct;
};

/// Generates profiles for every source position from its coarse profile and
/// writes augmented_map.csv; with paired_run, runs Dueling DQN on both maps and
/// reports the gap of the augmented-map placement evaluated on the true map.
inline AugmentOutcome cmd_cgan_augment(const Context& ctx, const std::string& checkpoint, bool paired_run) {
    prepare_output(ctx);
    const auto& c = ctx.config;
    const auto source = obtain_map(ctx);
    const auto nets = cgan::cgan_from_json(nn::read_checkpoint(checkpoint), c.cgan);
    const auto sampling = cgan::sampling_for(source, c.cgan.downsample);
    const auto sub = subsample_map(source, c.run.subsample_stride_m);
    const auto augmented = cgan::augment_map(nets, source, sampling, sub.positions());
    save_map(augmented, ctx.out("augmented_map.csv"));
    AugmentOutcome out;
    out.profiles = augmented.size();
    if (paired_run) {
        const auto on_true = run_dqn(source, c, nn::HeadKind::dueling, c.run.seed, ctx.log);
        const auto on_aug = run_dqn(augmented, c, nn::HeadKind::dueling, c.run.seed, ctx.log);
        out.true_map_cost = on_true.cost;
        out.augmented_cost_on_true_map = combined_cost(on_aug.positions, source, c.cost);
        out.gap_pct = 100.0 * (*out.augmented_cost_on_true_map - on_true.cost) / on_true.cost;
        const nlohmann::json doc{{"true_map_positions", on_true.positions},
                                 {"true_map_cost", on_true.cost},
                                 {"augmented_map_positions", on_aug.positions},
                                 {"augmented_map_cost", on_aug.cost},
                                 {"augmented_positions_cost_on_true_map", *out.augmented_cost_on_true_map},
                                 {"gap_pct", *out.gap_pct},
                                 {"threshold_pct", c.run.augmented_gap_pct},
                                 {"within_threshold", *out.gap_pct <= c.run.augmented_gap_pct}};
        io::write_text(ctx.out("augment_gap.json"), doc.dump(2) + "\n");
    }
    return out;
}

} // namespace apopt::cli
