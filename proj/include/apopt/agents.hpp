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

#include "env.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace apopt {

enum class EpsilonSchedule {
    multiplicative,  // eps <- max(eps * decay, eps_min) once per environment step
    exponential,     // eps_t = eps_min + (eps_start - eps_min) exp(-rate t)
};

enum class OptimizerKind { adam, sgd };

struct Hyperparams {
    double gamma = 0.995;
    double epsilon_start = 1.0;
    double epsilon_decay = 0.995;
    double epsilon_min = 0.01;
    EpsilonSchedule epsilon_schedule = EpsilonSchedule::multiplicative;
    double epsilon_exp_rate = 0.005;
    int episodes = 1500;
    int batch_size = 64;
    int replay_capacity = 2000;
    int target_sync_every = 100;
    double learning_rate = 0.001;
    OptimizerKind optimizer = OptimizerKind::adam;
    // Rewards enter the replay buffer multiplied by this factor (a change of units for Q).
    double reward_scale = 1.0 / 300.0;
    nn::QNetShape shape{};
    std::uint64_t seed = 0;

    void validate() const {
        detail::require_config(gamma >= 0.0 && gamma < 1.0, "agent.gamma must lie in [0, 1)");
        detail::require_config(epsilon_min > 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0,
                               "agent epsilons must satisfy 0 < epsilon_min <= epsilon_start <= 1");
        detail::require_config(epsilon_decay > 0.0 && epsilon_decay <= 1.0, "agent.epsilon_decay must lie in (0, 1]");
        detail::require_config(epsilon_exp_rate >= 0.0, "agent.epsilon_exp_rate must be >= 0");
        detail::require_config(episodes >= 0, "agent.episodes must be >= 0");
        detail::require_config(batch_size >= 1 && batch_size <= replay_capacity,
                               "agent.batch_size must lie in [1, replay_capacity]");
        detail::require_config(target_sync_every >= 1, "agent.target_sync_every must be >= 1");
        detail::require_config(learning_rate > 0.0, "agent.learning_rate must be > 0");
        detail::require_config(reward_scale > 0.0, "agent.reward_scale must be > 0");
        detail::require_config(shape.input == kStateSize && shape.actions == kActionCount,
                               "agent network must map 4 state inputs to 27 actions");
    }
};

using Observation = std::array<double, kStateSize>;

struct Transition {
    Observation state{};
    int action = 0;
    double reward = 0.0;
    Observation next_state{};
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed-capacity ring buffer; once full, the oldest transition is overwritten.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        detail::require_config(capacity > 0, "replay capacity must be > 0");
        data_.reserve(capacity);
    }

    void push(const Transition& t) {
        if (data_.size() < capacity_) {
            data_.push_back(t);
        } else {
            data_[next_] = t;
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const noexcept { return data_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }

    /// i-th oldest stored transition.
    const Transition& oldest(std::size_t i) const {
        const std::size_t start = data_.size() < capacity_ ? 0 : next_;
        return data_.at((start + i) % data_.size());
    }

    /// batch distinct transitions drawn uniformly without replacement.
    template <class Rng>
    std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const {
        detail::require(batch <= data_.size(), "replay buffer holds fewer transitions than the batch size");
        // Partial Fisher-Yates over an index permutation.
        indices_.resize(data_.size());
        for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = i;
        std::vector<const Transition*> out(batch);
        for (std::size_t k = 0; k < batch; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, indices_.size() - 1);
            std::swap(indices_[k], indices_[pick(rng)]);
            out[k] = &data_[indices_[k]];
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
    mutable std::vector<std::size_t> indices_;
};

/// Index of the largest value; ties go to the lowest index.
inline int argmax(std::span<const double> q) {
    detail::require(!q.empty(), "argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return static_cast<int>(best);
}

/// Epsilon-greedy: one uniform draw r; r < epsilon explores uniformly over the
/// 27 actions, otherwise the greedy action is taken.
template <class Rng>
int select_action(const nn::QNetwork& net, std::span<const double> s_norm, double epsilon, Rng& rng) {
    detail::require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<int> uniform(0, kActionCount - 1);
        return uniform(rng);
    }
    return argmax(net.q_values(s_norm));
}

inline double decay_epsilon(double eps, double decay = 0.995, double eps_min = 0.01) {
    return std::max(eps * decay, eps_min);
}

/// Epsilon after t environment steps under the exponential schedule.
inline double exponential_epsilon(double eps_start, double eps_min, double rate, std::int64_t t) {
    return eps_min + (eps_start - eps_min) * std::exp(-rate * static_cast<double>(t));
}

/// y_j = R_j for terminal transitions, R_j + gamma max_a' Q(s_{j+1}, a'; target) otherwise.
inline std::vector<double> td_targets(std::span<const Transition* const> batch, const nn::QNetwork& target_net,
                                      double gamma, nn::QCache& cache) {
    detail::require(!batch.empty(), "td_targets needs a nonempty batch");
    std::vector<double> next(batch.size() * kStateSize);
    for (std::size_t j = 0; j < batch.size(); ++j)
        std::copy(batch[j]->next_state.begin(), batch[j]->next_state.end(), next.begin() + j * kStateSize);
    target_net.forward(next, batch.size(), cache);
    const std::size_t na = target_net.shape().actions;
    std::vector<double> y(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        if (batch[j]->done) {
            y[j] = batch[j]->reward;
        } else {
            const double* q = cache.q.data() + j * na;
            y[j] = batch[j]->reward + gamma * *std::max_element(q, q + na);
        }
    }
    return y;
}

inline std::vector<double> td_targets(std::span<const Transition> batch, const nn::QNetwork& target_net, double gamma) {
    std::vector<const Transition*> ptrs;
    for (const auto& t : batch) ptrs.push_back(&t);
    nn::QCache cache;
    return td_targets(ptrs, target_net, gamma, cache);
}

struct EpisodeTrace {
    int episode = 0;
    int steps = 0;
    double final_cost = 0.0;
    double best_cost = 0.0;  // running minimum over the whole run so far
    double epsilon = 0.0;
};

struct TrainingResult {
    nn::HeadKind kind = nn::HeadKind::dueling;
    ApTriple initial_positions{};
    double initial_cost = 0.0;
    ApTriple best_positions{};
    double best_cost = 0.0;
    std::vector<EpisodeTrace> trace;
    std::int64_t env_steps = 0;
    std::int64_t gradient_steps = 0;
    double final_epsilon = 0.0;
    nn::QNetwork net;
};

/// Replay, target network and optimiser state of one learner.
class DqnLearner {
public:
    DqnLearner(nn::HeadKind kind, const Hyperparams& hp)
        : hp_(hp), online_(kind, hp.shape, hp.seed), target_(online_), buffer_(static_cast<std::size_t>(hp.replay_capacity)),
          adam_(online_.param_count(), nn::AdamConfig{hp.learning_rate}), grads_(online_.param_count()) {}

    const nn::QNetwork& online() const noexcept { return online_; }
    const nn::QNetwork& target() const noexcept { return target_; }
    const ReplayBuffer& buffer() const noexcept { return buffer_; }

    void remember(const Transition& t) { buffer_.push(t); }
    void sync_target() { target_.assign_params(online_); }
    bool ready() const { return buffer_.size() >= static_cast<std::size_t>(hp_.batch_size); }

    /// One minibatch update on (1/B) sum_j (y_j - Q(s_j, a_j))^2. Returns the loss.
    template <class Rng>
    double learn(Rng& rng) {
        const auto batch = buffer_.sample(static_cast<std::size_t>(hp_.batch_size), rng);
        const auto y = td_targets(batch, target_, hp_.gamma, target_cache_);
        const std::size_t b = batch.size();
        states_.resize(b * kStateSize);
        for (std::size_t j = 0; j < b; ++j)
            std::copy(batch[j]->state.begin(), batch[j]->state.end(), states_.begin() + j * kStateSize);
        online_.forward(states_, b, cache_);
        const std::size_t na = online_.shape().actions;
        d_q_.assign(b * na, 0.0);
        double loss = 0.0;
        for (std::size_t j = 0; j < b; ++j) {
            const double err = cache_.q[j * na + batch[j]->action] - y[j];
            loss += err * err;
            d_q_[j * na + batch[j]->action] = 2.0 * err / static_cast<double>(b);
        }
        std::fill(grads_.begin(), grads_.end(), 0.0);
        online_.backward(cache_, d_q_, grads_);
        if (hp_.optimizer == OptimizerKind::adam) {
            nn::adam_step(online_.params(), grads_, adam_);
        } else {
            nn::sgd_step(online_.params(), grads_, hp_.learning_rate);
        }
        return loss / static_cast<double>(b);
    }

private:
    Hyperparams hp_;
    nn::QNetwork online_;
    nn::QNetwork target_;
    ReplayBuffer buffer_;
    nn::AdamState adam_;
    std::vector<double> grads_;
    std::vector<double> states_, d_q_;
    nn::QCache cache_, target_cache_;
};

using EpisodeCallback = std::function<void(const EpisodeTrace&)>;

/// DQN training over the tunnel environment. The plain and dueling variants share
/// every component except the network head. The reported solution is the
/// lowest-cost state visited over the whole run, including the initial state.
inline TrainingResult train(const TunnelEnv& env, nn::HeadKind kind, const Hyperparams& hp,
                            const EpisodeCallback& on_episode = {}) {
    hp.validate();
    const EnvConfig& ecfg = env.config();
    DqnLearner learner(kind, hp);
    std::mt19937_64 rng(hp.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainingResult result;
    result.kind = kind;
    const State initial = env.reset();
    result.initial_positions = initial.positions;
    result.initial_cost = initial.cost;
    result.best_positions = initial.positions;
    result.best_cost = initial.cost;

    double eps = hp.epsilon_start;
    std::int64_t total_steps = 0;
    for (int ep = 0; ep < hp.episodes; ++ep) {
        State s = env.reset();
        int steps = 0;
        while (!(s.cost < ecfg.terminate_threshold) && steps < ecfg.max_steps_per_episode) {
            const Observation obs = env.observe(s);
            const int action = select_action(learner.online(), obs, eps, rng);
            const StepResult r = env.step(s, action);
            learner.remember(Transition{obs, action, r.reward * hp.reward_scale, env.observe(r.next), r.done});
            if (learner.ready()) {
                learner.learn(rng);
                ++result.gradient_steps;
            }
            ++steps;
            ++total_steps;
            if (total_steps % hp.target_sync_every == 0) learner.sync_target();
            eps = hp.epsilon_schedule == EpsilonSchedule::multiplicative
                      ? decay_epsilon(eps, hp.epsilon_decay, hp.epsilon_min)
                      : exponential_epsilon(hp.epsilon_start, hp.epsilon_min, hp.epsilon_exp_rate, total_steps);
            s = r.next;
            if (s.cost < result.best_cost) {
                result.best_cost = s.cost;
                result.best_positions = s.positions;
            }
        }
        result.trace.push_back(EpisodeTrace{ep + 1, steps, s.cost, result.best_cost, eps});
        if (on_episode) on_episode(result.trace.back());
    }
    result.env_steps = total_steps;
    result.final_epsilon = eps;
    result.net = learner.online();
    return result;
}

/// Greedy (epsilon = 0) rollout of a fixed network from the reset state.
inline std::vector<State> greedy_rollout(const TunnelEnv& env, const nn::QNetwork& net, int max_steps) {
    std::vector<State> path{env.reset()};
    for (int t = 0; t < max_steps && !(path.back().cost < env.config().terminate_threshold); ++t) {
        const auto obs = env.observe(path.back());
        path.push_back(env.step(path.back(), argmax(net.q_values(obs))).next);
    }
    return path;
}

inline void write_trace_csv(const std::vector<EpisodeTrace>& trace, const std::string& path) {
    io::CsvWriter csv(path, "episode,steps,final_cost,best_cost,epsilon");
    for (const auto& t : trace)
        csv.row({std::to_string(t.episode), std::to_string(t.steps), io::fixed(t.final_cost), io::fixed(t.best_cost),
                 io::fixed(t.epsilon, 8)});
}

} // namespace apopt
