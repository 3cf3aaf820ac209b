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

#ifndef TGBRANCH_REWARDS_HPP_
#define TGBRANCH_REWARDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tgbranch/bnb.hpp"

namespace tgb {

// Reference statistics from one reliability-branching run, used to
// instance-normalize the learned policy's rewards.
struct BaselineStats {
  std::string instance;
  std::uint64_t seed = 0;
  double nodes = 1.0;  // B, >= 1
  double gap0 = 1.0;   // gap at the first decision
  double pdi0 = 0.0;   // final PDI of the baseline run
  RunStatus status = RunStatus::kOptimal;
};

// Per-step view of the learner's own run.
struct RewardState {
  std::int64_t t = 0;      // decision index (t = 0 guards the gap delta)
  double n_t = 0.0;        // cumulative nodes explored
  double dn_t = 0.0;       // nodes added by this decision
  double gap0 = 1.0;       // episode-initial gap
  double gap_prev = 1.0;
  double gap_t = 1.0;
  double pdi_prev = 0.0;
  double pdi_t = 0.0;
  double tau = 0.0;        // in [0, 1]
  double open_prev = 0.0;  // frontier size before / after the decision
  double open_t = 0.0;
};

enum class RewardSignal { kH1, kH2, kH3 };

RewardSignal parse_reward_signal(const std::string& name);  // "H1".."H3"
std::string reward_signal_name(RewardSignal s);

double h1_step(const RewardState& rs, const BaselineStats& bs);
double h1_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs);

double h2_step(const RewardState& rs, const BaselineStats& bs);
double h2_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs);

struct H3Weights {
  double difficulty = 0.5;
  double nodes = 0.0;
  double gap = 0.0;
  double pdi = 0.0;
  double pace = 0.0;
  double prog = 0.15;
};
H3Weights h3_weights(double baseline_nodes);

double h3_step(const RewardState& rs, const BaselineStats& bs,
               const H3Weights& w);
double h3_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs);

// Dispatch helpers over the configured signal.
double step_reward(RewardSignal sig, const RewardState& rs,
                   const BaselineStats& bs);
double terminal_reward(RewardSignal sig, RunStatus status, double n_terminal,
                       const RewardState& rs, const BaselineStats& bs);

// --- Baseline acquisition ---------------------------------------------------

// Runs the reliability policy under cfg and records (B, gap0, pdi0).  When
// manifest_path is non-empty, results are cached there keyed by
// (instance name, seed) and repeated calls are served from the cache.
BaselineStats acquire_baseline(const MilpInstance& inst, std::uint64_t seed,
                               const RunConfig& cfg,
                               const std::string& manifest_path = "");

std::vector<BaselineStats> read_baseline_manifest(const std::string& path);
void write_baseline_manifest(const std::string& path,
                             const std::vector<BaselineStats>& rows);

std::string run_status_name(RunStatus s);
RunStatus parse_run_status(const std::string& name);

}  // namespace tgb

#endif  // TGBRANCH_REWARDS_HPP_
