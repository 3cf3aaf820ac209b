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

#ifndef TGBRANCH_FEATURES_HPP_
#define TGBRANCH_FEATURES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tgbranch/milp.hpp"
#include "tgbranch/pseudocost.hpp"
#include "tgbranch/simplex.hpp"

namespace tgb {

// Frozen feature schema version; checkpoints record it.
inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr int kCandidateFeatureDim = 25;
inline constexpr int kNodeFeatureDim = 8;
inline constexpr int kTreeFeatureDim = 53;

struct StateFeatures {
  Eigen::MatrixXd candidates;        // L x 25 (rows beyond |C| are zero)
  Eigen::VectorXd node;              // 8
  Eigen::VectorXd tree;              // 53
  std::vector<bool> pad_mask;        // length L, true = padded slot
  std::vector<int> candidate_var_ids;  // length |C|

  int num_candidates() const {
    int n = 0;
    for (bool p : pad_mask) n += !p;
    return n;
  }
};

struct CandidateInfo {
  int var = 0;
  double value = 0.0;              // LP value x*
  BasisStatus basis = BasisStatus::kAtLower;
  int times_branched_on_path = 0;
};

// Everything the featurizer reads from the live solver.  The engine keeps
// these aggregates incrementally; the featurizer is a pure function of them.
struct SolverSnapshot {
  const MilpInstance* instance = nullptr;
  const PseudocostTable* pseudocosts = nullptr;
  std::vector<CandidateInfo> candidates;

  // Current node.
  int depth = 0;
  double node_bound = 0.0;
  int child_side = 2;  // 0 = left, 1 = right, 2 = root
  int plunge_depth = 0;
  int num_fixed_integers = 0;

  // Bounds and gap.
  double primal = kInf;
  double dual = -kInf;
  double root_bound = 0.0;
  double gap = 1.0;
  double prev_gap = 1.0;
  double tau = 0.0;

  // Tree shape / frontier (open set includes the node being processed).
  std::int64_t explored = 0;
  std::vector<int> open_depths;
  std::vector<double> open_bounds;
  int max_depth = 0;
  int best_bound_depth = 0;
  std::int64_t n_pruned_bound = 0;
  std::int64_t n_pruned_infeasible = 0;
  std::int64_t n_fathomed_integral = 0;
  double last_selected_bound = 0.0;

  // Branching history.
  std::int64_t decisions = 0;
  std::int64_t decision_budget = 1;
  std::int64_t branch_depth_buckets[3] = {0, 0, 0};  // [0,5), [5,15), [15,inf)
  double gain_sum = 0.0;
  double gain_sq_sum = 0.0;
  std::int64_t gain_count = 0;
  std::int64_t branchings = 0;
  std::int64_t both_children_fathomed = 0;
  int path_length = 0;
  int path_distinct_vars = 0;
  std::vector<std::int64_t> branched_var_counts;  // per variable
  bool last_gains_valid = false;
  double last_down_gain = 0.0;
  double last_up_gain = 0.0;

  // LP statistics.
  std::int64_t lp_solves = 0;
  std::int64_t lp_iter_sum = 0;
  std::int64_t last_lp_iters = 0;
  std::int64_t child_lps = 0;
  std::int64_t child_lp_infeasible = 0;
  std::int64_t lp_limit_hits = 0;
  double child_bound_change_sum = 0.0;

  // Progress.
  double pdi = 0.0;
  double baseline_pdi = 0.0;
};

// Feature extraction per the documented schema (docs/feature_schema.md).
// Every output entry is finite and clamped to [-5, 5]; non-finite
// intermediates are replaced by 0 before the clamp.
// Throws Error(EMPTY_CANDIDATES) when the snapshot carries no candidates.
Eigen::MatrixXd candidate_features(const SolverSnapshot& ctx);
Eigen::VectorXd node_features(const SolverSnapshot& ctx);
Eigen::VectorXd tree_features(const SolverSnapshot& ctx);
StateFeatures extract_features(const SolverSnapshot& ctx);

// Appends `extra` zero rows with pad_mask = true (batching helper).
StateFeatures pad_features(const StateFeatures& f, int extra);

}  // namespace tgb

#endif  // TGBRANCH_FEATURES_HPP_
