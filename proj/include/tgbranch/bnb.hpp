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

#ifndef TGBRANCH_BNB_HPP_
#define TGBRANCH_BNB_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tgbranch/features.hpp"
#include "tgbranch/milp.hpp"
#include "tgbranch/pseudocost.hpp"
#include "tgbranch/simplex.hpp"

namespace tgb {

enum class RunStatus { kOptimal, kTimeLimit, kInfeasible, kUnbounded };
enum class NodeStatus {
  kOpen,
  kBranched,
  kPrunedBound,
  kPrunedInfeasible,
  kFathomedIntegral
};
enum class ChildSide { kLeft, kRight, kRoot };

struct NodeRecord {
  std::int64_t id = 0;
  std::int64_t parent_id = -1;
  int depth = 0;
  int branch_var = -1;        // variable branched on when creating this node
  ChildSide child_side = ChildSide::kRoot;
  double lp_bound = -kInf;
  NodeStatus status = NodeStatus::kOpen;
  std::vector<double> lower;  // working bounds (retained while OPEN)
  std::vector<double> upper;
  std::vector<double> lp_solution;
  std::vector<BasisStatus> lp_basis;
  int branched_on = -1;       // decision taken at this node, once BRANCHED
};

struct GapPoint {
  double clock = 0.0;
  double gap = 0.0;
};

struct RunStats {
  std::int64_t nodes_explored = 0;  // LP-solved nodes
  RunStatus status = RunStatus::kTimeLimit;
  std::vector<GapPoint> gap_timeline;
  double pdi = 0.0;
  std::int64_t decisions = 0;
  double clock = 0.0;
  double dual_bound = -kInf;
  double best_objective = kInf;     // incumbent (informational under cutoff)
  std::vector<double> best_solution;
};

// gap = min(1, |primal - dual| / max(|primal|, |dual|, 1e-10));
// 1 when either bound is infinite.
double compute_gap(double primal, double dual);

// Left-rectangle accumulation: pdi += gap * dt.
void accumulate_pdi(RunStats& stats, double gap, double dt);

class BnbEngine;

struct DecisionContext {
  const SolverSnapshot* snapshot = nullptr;
  BnbEngine* engine = nullptr;           // strong-branching probes
  PseudocostTable* pseudocosts = nullptr;  // mutable for reliability updates
  std::mt19937_64* rng = nullptr;
};

// Branching-policy interface: decide() returns the index of a non-padded
// candidate row of `state`.
class BranchingPolicy {
 public:
  virtual ~BranchingPolicy() = default;
  virtual int decide(const StateFeatures& state, DecisionContext& ctx) = 0;
  virtual void observe(const RunStats& /*outcome*/) {}
};

struct RunConfig {
  std::optional<double> cutoff;
  std::int64_t node_budget = 100000;
  std::int64_t decision_budget = 100000;
  double time_budget = kInf;      // seconds, used when wall_clock is set
  bool wall_clock = false;        // default clock is decisions/decision_budget
  double integrality_tol = 1e-6;
  std::uint64_t seed = 0;
  double baseline_pdi = 0.0;      // feeds the progress feature
  std::ostream* event_log = nullptr;
};

// Per-decision record consumed by the trainer; aggregates are sampled just
// before and just after the children of the decision were solved.
struct DecisionEvent {
  StateFeatures state;
  int action = 0;
  double clock = 0.0;
  double tau = 0.0;
  std::int64_t nodes_before = 0;
  std::int64_t nodes_after = 0;
  double gap_before = 1.0;
  double gap_after = 1.0;
  double pdi_before = 0.0;
  double pdi_after = 0.0;
  std::int64_t open_before = 0;
  std::int64_t open_after = 0;
};

struct ProbeResult {
  bool feasible = false;
  double bound = kInf;
};

class BnbEngine {
 public:
  // inst must be validated (all rows <=).  One engine instance runs one
  // search; engines are independently instantiable for concurrent runs.
  BnbEngine(const MilpInstance& inst, const RunConfig& cfg);

  RunStats run(BranchingPolicy& policy,
               std::vector<DecisionEvent>* trajectory = nullptr);

  // Solves the two child LPs of the current node's candidate `cand_index`
  // without creating nodes (strong-branching probe).
  std::pair<ProbeResult, ProbeResult> probe_children(int cand_index);

  const PseudocostTable& pseudocosts() const { return pseudocosts_; }

 private:
  void build_snapshot(const NodeRecord& node, SolverSnapshot* snap) const;
  double prune_level() const;
  double current_primal() const;
  double current_dual(const NodeRecord* active) const;
  ProbeResult solve_child(const NodeRecord& parent, int var, bool up);

  const MilpInstance& inst_;
  RunConfig cfg_;
  PseudocostTable pseudocosts_;
  std::mt19937_64 rng_;

  std::vector<NodeRecord> nodes_;
  std::vector<std::int64_t> open_;  // ids, scanned for best bound
  RunStats stats_;
  SolverSnapshot agg_;              // incremental aggregates
  double incumbent_ = kInf;
  std::vector<double> incumbent_sol_;
  std::int64_t last_branched_id_ = -1;
  const NodeRecord* active_node_ = nullptr;
};

// Convenience wrapper.
RunStats run_bnb(const MilpInstance& inst, BranchingPolicy& policy,
                 const RunConfig& cfg,
                 std::vector<DecisionEvent>* trajectory = nullptr);

// Baseline policies: random, most_fractional, pscost, strong, relpscost.
// Throws Error(UNKNOWN_POLICY) for anything else.
std::unique_ptr<BranchingPolicy> make_baseline_policy(const std::string& name,
                                                      std::uint64_t seed = 0);
std::vector<std::string> baseline_policy_names();

}  // namespace tgb

#endif  // TGBRANCH_BNB_HPP_
