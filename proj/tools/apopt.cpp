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


#include <apopt/commands.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kRuntimeError = 3 };

apopt::ApTriple parse_triple(const std::string& text) {
    apopt::ApTriple x{};
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
        const auto end = text.find(',', start);
        if ((k < 2) != (end != std::string::npos)) throw apopt::ConfigError("--positions expects x1,x2,x3");
        const auto part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
        try {
            std::size_t used = 0;
            x[static_cast<std::size_t>(k)] = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw apopt::ConfigError("--positions: '" + part + "' is not an integer");
        }
        start = end + 1;
    }
    return x;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Access point placement optimization for tunnel radio coverage"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string map_path;
    std::int64_t seed = -1;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "Base random seed (overrides run.seed)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--map", map_path, "Path-loss map CSV (default: synthetic model)");

    auto* simulate = app.add_subcommand("simulate", "Write the synthetic path-loss map");
    auto* compare = app.add_subcommand("compare", "Hooke-Jeeves, DQN and Dueling DQN comparison");
    auto* sweep = app.add_subcommand("alpha-sweep", "Dueling DQN for each run.alphas value");
    auto* stats = app.add_subcommand("stats", "Path-loss PDF/CDF and received power per receiver");
    std::string positions;
    stats->add_option("--positions", positions, "Optimized placement as x1,x2,x3");
    auto* cgan_train = app.add_subcommand("cgan-train", "Train the cGAN surrogate on subsampled profiles");
    bool write_dataset = false;
    cgan_train->add_flag("--write-dataset", write_dataset, "Also write the training pairs as CSV");
    auto* cgan_augment = app.add_subcommand("cgan-augment", "Complete a map with cGAN-generated profiles");
    std::string checkpoint;
    bool paired = false;
    cgan_augment->add_option("--checkpoint", checkpoint, "cGAN checkpoint (default: <out>/cgan.json)");
    cgan_augment->add_flag("--paired-run", paired, "Compare Dueling DQN on the augmented and the source map");
    auto* train = app.add_subcommand("train", "Train a single DQN agent");
    std::string head = "dueling";
    train->add_option("--head", head, "Network head")->check(CLI::IsMember({"plain", "dueling"}))->capture_default_str();
    auto* hj = app.add_subcommand("hj", "Hooke-Jeeves pattern search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    apopt::cli::Context ctx;
    ctx.log = apopt::cli::Logger::from_env();
    ctx.out_dir = out_dir;
    try {
        if (!config_path.empty()) ctx.config = apopt::load_config(config_path);
        if (seed >= 0) ctx.config.run.seed = static_cast<std::uint64_t>(seed);
        if (!map_path.empty()) ctx.map_path = map_path;

        if (*simulate) {
            apopt::cli::cmd_simulate(ctx);
        } else if (*compare) {
            const auto r = apopt::cli::cmd_compare(ctx);
            std::cout << "median cost  hooke_jeeves " << apopt::io::fixed(r.median_hj, 3) << "  dqn "
                      << apopt::io::fixed(r.median_dqn, 3) << "  dueling_dqn " << apopt::io::fixed(r.median_dueling, 3)
                      << '\n';
        } else if (*sweep) {
            apopt::cli::cmd_alpha_sweep(ctx);
        } else if (*stats) {
            std::optional<apopt::ApTriple> x;
            if (!positions.empty()) x = parse_triple(positions);
            apopt::cli::cmd_stats(ctx, x);
        } else if (*cgan_train) {
            apopt::cli::cmd_cgan_train(ctx, write_dataset);
        } else if (*cgan_augment) {
            if (checkpoint.empty()) checkpoint = ctx.out("cgan.json");
            const auto res = apopt::cli::cmd_cgan_augment(ctx, checkpoint, paired);
            if (res.gap_pct)
                std::cout << "augmented-map gap: " << apopt::io::fixed(*res.gap_pct, 2) << "% (threshold "
                          << apopt::io::fixed(ctx.config.run.augmented_gap_pct, 2) << "%)\n";
        } else if (*train) {
            apopt::cli::cmd_train(ctx, head == "plain" ? apopt::nn::HeadKind::plain : apopt::nn::HeadKind::dueling);
        } else if (*hj) {
            apopt::cli::cmd_hj(ctx);
        }
    } catch (const apopt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const apopt::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const apopt::LookupError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const apopt::DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
