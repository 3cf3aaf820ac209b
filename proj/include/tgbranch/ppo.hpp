// Copyright 2026 The tgbranch authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TGBRANCH_PPO_HPP_
#define TGBRANCH_PPO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgbranch/rewards.hpp"
#include "tgbranch/tgnet.hpp"

namespace tgb {

struct Transition {
  StateFeatures state;
  int action = 0;
  double log_prob_old = 0.0;  // <= 0
  double value_old = 0.0;
  double reward = 0.0;
  bool terminal = false;
};

struct TrainConfig {
  double actor_lr = 2.4e-4;
  double critic_lr = 1.2e-4;
  double clip_eps = 0.16;
  double entropy_coef = 3e-3;
  double value_coef = 0.5;
  double gamma = 0.97;
  double gae_lambda = 0.92;
  int minibatch = 256;
  int epochs = 3;
  int horizon = 512;
  double grad_clip_norm = 0.5;
  double weight_decay = 0.01;
  int episodes = 300;
  RewardSignal reward_signal = RewardSignal::kH3;
  int seeds = 5;  // per-instance seed augmentation
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(BAD_CONFIG)
};

// advantages[t] = delta_t + gamma*lambda*(1-terminal_t)*advantages[t+1] with
// delta_t = r_t + gamma*V_{t+1}*(1-terminal_t) - V_t; returns = A + V.
// V_{T} past the buffer end is bootstrap_value.
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<Transition>& buffer, double bootstrap_value,
    double gamma, double lambda);

// In-place standardization to mean 0, std 1 (eps 1e-8); no-op for size < 2.
void standardize(std::vector<double>& v);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 1.0;
  double clip_frac = 0.0;
  int minibatches = 0;
};

// Clipped-surrogate PPO with AdamW (decoupled weight decay, separate actor
// and critic step sizes keyed on the "critic_" name prefix).
class PpoTrainer {
 public:
  PpoTrainer(const NetConfig& net_cfg, const TrainConfig& cfg);
  PpoTrainer(const NetConfig& net_cfg, const TrainConfig& cfg,
             ParamMap params);

  const ParamMap& params() const { return params_; }
  ParamMap& params() { return params_; }
  const TgNet& net() const { return net_; }

  // E epochs of shuffled minibatches over the buffer; clears the buffer.
  // Throws Error(NON_FINITE_LOSS) and Error(NON_FINITE_GRAD).
  UpdateStats update(std::vector<Transition>& buffer);

 private:
  struct Grads;
  UpdateStats minibatch_step(const std::vector<Transition>& buffer,
                             const std::vector<int>& index,
                             const std::vector<double>& advantages,
                             const std::vector<double>& returns);
  void apply(const std::map<std::string, Eigen::MatrixXd>& grads);

  TgNet net_;
  TrainConfig cfg_;
  ParamMap params_;
  ParamMap m_, v_;  // AdamW moments
  std::int64_t step_ = 0;
  std::mt19937_64 rng_;
};

// One training episode source: an instance with its expert cutoff.
struct TrainTask {
  MilpInstance instance;
  std::optional<double> cutoff;
};

struct EpisodeLog {
  int episode = 0;
  std::string instance;
  std::uint64_t seed = 0;
  std::int64_t nodes = 0;
  double pdi = 0.0;
  RunStatus status = RunStatus::kTimeLimit;
  double sum_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
};

struct TrainResult {
  NetConfig net_cfg;
  ParamMap params;
  std::vector<EpisodeLog> log;
};

std::string training_log_csv(const std::vector<EpisodeLog>& log);

// Branching policy wrapping the net in rollout mode; samples from the
// categorical head and records (action, log_prob, value) per decision.
class NetRolloutPolicy : public BranchingPolicy {
 public:
  NetRolloutPolicy(const TgNet& net, const ParamMap& params,
                   std::uint64_t seed, bool greedy = false);
  int decide(const StateFeatures& state, DecisionContext& ctx) override;

  struct Step {
    int action = 0;
    double log_prob = 0.0;
    double value = 0.0;
  };
  const std::vector<Step>& steps() const { return steps_; }

 private:
  const TgNet& net_;
  const ParamMap& params_;
  std::mt19937_64 rng_;
  bool greedy_;
  std::vector<Step> steps_;
};

// Builds the reward-labelled transitions of one finished episode.
std::vector<Transition> make_transitions(
    const std::vector<DecisionEvent>& traj,
    const std::vector<NetRolloutPolicy::Step>& steps, const RunStats& stats,
    const BaselineStats& baseline, RewardSignal signal);

// Episode loop: samples (task, seed) uniformly from the seed-augmented pool,
// rolls out one budgeted search per episode, updates, and logs.  Baselines
// are acquired (and cached in baseline_manifest when non-empty) on first use.
TrainResult train(const std::vector<TrainTask>& tasks,
                  const NetConfig& net_cfg, const TrainConfig& cfg,
                  const RunConfig& run_cfg,
                  const std::string& baseline_manifest = "",
                  const std::string& log_path = "",
                  const std::string& checkpoint_path = "");

}  // namespace tgb

#endif  // TGBRANCH_PPO_HPP_
