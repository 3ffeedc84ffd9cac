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


#include <apopt/agents.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace apopt;
using Catch::Matchers::WithinAbs;

namespace {

const PathLossMap& toy_map() {
    static const PathLossMap map = [] {
        TunnelGeometry g;
        g.length_m = 40.0;
        return build_synthetic_map(g, AntennaConfig{}, ReceiverGrid::for_length(40.0, 0.5), SyntheticModelParams{});
    }();
    return map;
}

EnvConfig toy_env() {
    EnvConfig e;
    e.length_m = 40;
    e.initial_positions = {0, 13, 26};
    e.max_steps_per_episode = 30;
    // short tunnels start below the default threshold; keep episodes running
    e.terminate_threshold = -1e9;
    return e;
}

Hyperparams small_hp(int episodes) {
    Hyperparams hp;
    hp.episodes = episodes;
    hp.batch_size = 16;
    hp.replay_capacity = 200;
    hp.seed = 3;
    hp.shape = nn::QNetShape{4, 16, 16, 27};
    return hp;
}

// A plain net whose Q vector is exactly the head biases.
nn::QNetwork constant_net(const std::vector<double>& q) {
    nn::QNetwork net(nn::HeadKind::plain, nn::QNetShape{4, 4, 4, q.size()}, 0);
    const auto& head = net.layout()[2];
    auto p = net.params();
    std::fill(p.begin() + static_cast<std::ptrdiff_t>(head.offset),
              p.begin() + static_cast<std::ptrdiff_t>(head.bias_offset()), 0.0);
    std::copy(q.begin(), q.end(), p.begin() + static_cast<std::ptrdiff_t>(head.bias_offset()));
    return net;
}

Transition transition(double reward, bool done) {
    return Transition{{0.1, 0.2, 0.3, 0.4}, 5, reward, {0.5, 0.6, 0.7, 0.8}, done};
}

} // namespace

TEST_CASE("hyperparameter defaults and validation", "[agents]") {
    const Hyperparams hp;
    CHECK(hp.gamma == 0.995);
    CHECK(hp.epsilon_start == 1.0);
    CHECK(hp.epsilon_decay == 0.995);
    CHECK(hp.epsilon_min == 0.01);
    CHECK(hp.episodes == 1500);
    CHECK(hp.batch_size == 64);
    CHECK(hp.replay_capacity == 2000);
    CHECK(hp.target_sync_every == 100);
    CHECK(hp.learning_rate == 0.001);
    Hyperparams bad = hp;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = hp;
    bad.batch_size = 3000;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = hp;
    bad.epsilon_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("epsilon decay", "[agents]") {
    CHECK(decay_epsilon(1.0) == 0.995);
    CHECK(decay_epsilon(0.01) == 0.01);
    CHECK(decay_epsilon(0.0100001) == 0.01);
    const int expected = static_cast<int>(std::ceil(std::log(0.01) / std::log(0.995)));
    REQUIRE(expected == 919);
    double eps = 1.0;
    int n = 0;
    while (eps > 0.01) {
        eps = decay_epsilon(eps);
        ++n;
    }
    CHECK(n == expected);
    CHECK_THAT(exponential_epsilon(1.0, 0.01, 0.005, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(exponential_epsilon(1.0, 0.01, 0.005, 1000000), WithinAbs(0.01, 1e-12));
}

TEST_CASE("replay buffer evicts oldest first", "[agents]") {
    ReplayBuffer buf(3);
    for (int k = 0; k < 5; ++k) buf.push(transition(-k, false));
    CHECK(buf.size() == 3);
    CHECK(buf.capacity() == 3);
    CHECK(buf.oldest(0).reward == -2.0);
    CHECK(buf.oldest(2).reward == -4.0);
}

TEST_CASE("replay sampling is without replacement", "[agents]") {
    ReplayBuffer buf(50);
    for (int k = 0; k < 50; ++k) buf.push(transition(k, false));
    std::mt19937_64 rng(1);
    const auto batch = buf.sample(50, rng);
    std::vector<double> seen;
    for (const auto* t : batch) seen.push_back(t->reward);
    std::sort(seen.begin(), seen.end());
    for (int k = 0; k < 50; ++k) REQUIRE(seen[static_cast<std::size_t>(k)] == k);
    CHECK_THROWS_AS(buf.sample(51, rng), DomainError);
}

TEST_CASE("greedy action selection and ties", "[agents]") {
    std::mt19937_64 rng(0);
    const double s[] = {0.0, 0.0, 0.0, 0.0};
    std::vector<double> q(27, 0.0);
    q[7] = 1.0;
    const auto net = constant_net(q);
    for (int k = 0; k < 100; ++k) REQUIRE(select_action(net, s, 0.0, rng) == 7);
    std::vector<double> tied(27, -1.0);
    tied[3] = 2.0;
    tied[12] = 2.0;
    CHECK(select_action(constant_net(tied), s, 0.0, rng) == 3);
    CHECK(argmax(std::vector<double>{1.0, 3.0, 3.0}) == 1);
}

TEST_CASE("fully random selection is uniform", "[agents][property]") {
    std::mt19937_64 rng(8);
    const auto net = constant_net(std::vector<double>(27, 0.0));
    const double s[] = {0.0, 0.0, 0.0, 0.0};
    std::vector<int> counts(27, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(select_action(net, s, 1.0, rng))];
    for (int c : counts) CHECK(std::abs(static_cast<double>(c) / n - 1.0 / 27.0) < 0.002);
    double chi2 = 0.0;
    const double e = static_cast<double>(n) / 27.0;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 54.05);  // 99.9% quantile of chi-square with 26 degrees of freedom
}

TEST_CASE("td targets", "[agents]") {
    std::vector<double> q(27, -100.0);
    q[4] = -40.0;
    const auto target = constant_net(q);
    const std::vector<Transition> batch{transition(-15.0, true), transition(-50.0, false)};
    const auto y = td_targets(batch, target, 0.995);
    CHECK(y[0] == -15.0);
    CHECK_THAT(y[1], WithinAbs(-89.8, 1e-12));
    const auto myopic = td_targets(batch, target, 0.0);
    CHECK(myopic == std::vector<double>{-15.0, -50.0});
    CHECK_THROWS_AS(td_targets(std::vector<Transition>{}, target, 0.9), DomainError);
}

TEST_CASE("learning step reduces the TD loss on a fixed batch", "[agents]") {
    auto hp = small_hp(0);
    hp.batch_size = 8;
    hp.replay_capacity = 8;
    DqnLearner learner(nn::HeadKind::dueling, hp);
    for (int k = 0; k < 8; ++k) learner.remember(transition(-0.5 - 0.1 * k, k % 3 == 0));
    std::mt19937_64 rng(2);
    const double first = learner.learn(rng);
    double last = first;
    for (int k = 0; k < 200; ++k) last = learner.learn(rng);
    CHECK(last < 0.1 * first);
}

TEST_CASE("zero episodes report the initial state", "[agents]") {
    const TunnelEnv env(toy_map(), CostConfig{}, toy_env());
    const auto r = train(env, nn::HeadKind::dueling, small_hp(0));
    CHECK(r.best_positions == toy_env().initial_positions);
    CHECK(r.best_cost == env.cost(toy_env().initial_positions));
    CHECK(r.trace.empty());
    CHECK(r.env_steps == 0);
}

TEST_CASE("training is reproducible and tracks the running best", "[agents]") {
    const TunnelEnv env(toy_map(), CostConfig{}, toy_env());
    for (auto kind : {nn::HeadKind::plain, nn::HeadKind::dueling}) {
        const auto a = train(env, kind, small_hp(12));
        const auto b = train(env, kind, small_hp(12));
        REQUIRE(a.trace.size() == 12);
        for (std::size_t k = 0; k < a.trace.size(); ++k) {
            REQUIRE(a.trace[k].final_cost == b.trace[k].final_cost);
            REQUIRE(a.trace[k].epsilon == b.trace[k].epsilon);
            if (k > 0) REQUIRE(a.trace[k].best_cost <= a.trace[k - 1].best_cost);
        }
        CHECK(a.best_positions == b.best_positions);
        CHECK(std::equal(a.net.params().begin(), a.net.params().end(), b.net.params().begin()));
        CHECK(a.best_cost == env.cost(a.best_positions));
        CHECK(a.best_cost <= a.initial_cost);
        CHECK(a.env_steps == 12 * 30);
        CHECK(a.gradient_steps == a.env_steps - 15);  // learning starts once 16 transitions are stored
    }
}

TEST_CASE("epsilon decays once per environment step", "[agents]") {
    const TunnelEnv env(toy_map(), CostConfig{}, toy_env());
    const auto r = train(env, nn::HeadKind::plain, small_hp(2));
    CHECK_THAT(r.trace[0].epsilon, WithinAbs(std::pow(0.995, 30), 1e-12));
    CHECK_THAT(r.final_epsilon, WithinAbs(std::pow(0.995, 60), 1e-12));
}

TEST_CASE("episodes end when the cost drops below the threshold", "[agents]") {
    auto e = toy_env();
    e.terminate_threshold = 1e9;
    const TunnelEnv env(toy_map(), CostConfig{}, e);
    const auto r = train(env, nn::HeadKind::plain, small_hp(3));
    // the initial state already satisfies the threshold
    for (const auto& t : r.trace) CHECK(t.steps == 0);
}

TEST_CASE("greedy rollout with a frozen net is deterministic", "[agents]") {
    const TunnelEnv env(toy_map(), CostConfig{}, toy_env());
    const nn::QNetwork net(nn::HeadKind::dueling, nn::QNetShape{}, 5);
    const auto a = greedy_rollout(env, net, 25);
    const auto b = greedy_rollout(env, net, 25);
    REQUIRE(a.size() == 26);
    for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(a[k] == b[k]);
}

TEST_CASE("trace CSV layout", "[agents][io]") {
    const std::vector<EpisodeTrace> trace{{1, 200, 120.5, 110.25, 0.5}, {2, 200, 100.0, 100.0, 0.25}};
    const auto path = (std::filesystem::temp_directory_path() / "apopt_trace.csv").string();
    write_trace_csv(trace, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "episode,steps,final_cost,best_cost,epsilon");
    CHECK(row == "1,200,120.500000,110.250000,0.50000000");
    std::filesystem::remove(path);
}
