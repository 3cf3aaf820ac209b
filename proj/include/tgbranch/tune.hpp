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

#ifndef TGBRANCH_TUNE_HPP_
#define TGBRANCH_TUNE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tgbranch/evalx.hpp"
#include "tgbranch/ppo.hpp"

namespace tgb {

// One cell of the (instance, seed) tuning grid with its cached difficulty.
struct TuneItem {
  MilpInstance instance;
  std::optional<double> cutoff;
  std::uint64_t seed = 0;
  double baseline_nodes = 1.0;  // stratification key
};

struct SampledConfig {
  NetConfig net;
  TrainConfig train;
};

// Uniform / log-uniform draw from the fixed hyperparameter search space.
SampledConfig sample_config(std::mt19937_64& rng);
// True iff cfg lies inside that space (used as a tuner invariant).
bool in_search_space(const SampledConfig& cfg);

// Deals items into k folds, round-robin within difficulty quartiles, so
// every fold's quartile histogram deviates by at most 1 per bin.
std::vector<int> stratified_folds(const std::vector<double>& difficulty,
                                  int k, std::mt19937_64& rng);

// Median pruner over intermediate scores (lower is better): a running
// trial stops after 3 consecutive steps above the completed-trial median.
class MedianPruner {
 public:
  void complete_trial(const std::vector<double>& scores);
  bool should_prune(const std::vector<double>& running) const;
  std::optional<double> median_at(std::size_t step) const;

 private:
  std::vector<std::vector<double>> per_step_;
};

struct TrialRecord {
  int id = 0;
  SampledConfig config;
  std::vector<double> inner_scores;
  bool pruned = false;
  double mean_score = kInf;  // mean outer-fold composite, kInf when pruned
};

struct TuneConfig {
  int trials = 8;
  int outer_folds = 5;
  int inner_folds = 2;
  int episodes_per_trial = 2;  // brief inner training
  std::uint64_t seed = 0;
};

struct TuneResult {
  SampledConfig best;
  std::vector<TrialRecord> trials;
};

// Nested cross-validation random search with median pruning.
// Throws Error(INSUFFICIENT_DATA) when the grid is smaller than the folds.
TuneResult nested_cv_tune(const std::vector<TuneItem>& items,
                          const TuneConfig& cfg, const RunConfig& run_cfg);

// `key = value` round-trip of a sampled configuration.
std::string config_to_text(const SampledConfig& cfg);
SampledConfig config_from_text(const std::string& text);

// Minimal config-file parser: `key = value` lines, `#` comments, unknown
// keys rejected with their line number.  Returns insertion-ordered pairs.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& text, const std::vector<std::string>& allowed_keys);

}  // namespace tgb

#endif  // TGBRANCH_TUNE_HPP_
