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

#include "tgbranch/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace tgb {

namespace {
constexpr double kPruneTol = 1e-9;
}

double compute_gap(double primal, double dual) {
  if (!std::isfinite(primal) || !std::isfinite(dual)) return 1.0;
  double denom = std::max({std::abs(primal), std::abs(dual), 1e-10});
  return std::min(1.0, std::abs(primal - dual) / denom);
}

void accumulate_pdi(RunStats& stats, double gap, double dt) {
  stats.pdi += gap * dt;
}

BnbEngine::BnbEngine(const MilpInstance& inst, const RunConfig& cfg)
    : inst_(inst), cfg_(cfg), pseudocosts_(inst.num_vars), rng_(cfg.seed) {
  agg_.instance = &inst_;
  agg_.pseudocosts = &pseudocosts_;
  agg_.branched_var_counts.assign(inst.num_vars, 0);
  agg_.decision_budget = cfg.decision_budget;
  agg_.baseline_pdi = cfg.baseline_pdi;
}

double BnbEngine::prune_level() const {
  return cfg_.cutoff ? *cfg_.cutoff : incumbent_;
}

double BnbEngine::current_primal() const {
  return cfg_.cutoff ? *cfg_.cutoff : incumbent_;
}

double BnbEngine::current_dual(const NodeRecord* active) const {
  double d = kInf;
  for (std::int64_t id : open_) d = std::min(d, nodes_[id].lp_bound);
  if (active) d = std::min(d, active->lp_bound);
  if (d == kInf) return current_primal();  // exhausted frontier
  return d;
}

ProbeResult BnbEngine::solve_child(const NodeRecord& parent, int var, bool up) {
  LpProblem p = lp_relaxation(inst_, parent.lower, parent.upper);
  double x = parent.lp_solution[var];
  if (up)
    p.lower[var] = std::ceil(x);
  else
    p.upper[var] = std::floor(x);
  LpOutcome out = solve_lp(p);
  if (out.status == LpStatus::kIterationLimit)
    throw Error("LP_ITERATION_LIMIT");
  ProbeResult r;
  if (out.status == LpStatus::kOptimal) {
    r.feasible = true;
    r.bound = out.objective_value;
  } else if (out.status == LpStatus::kUnbounded) {
    r.feasible = true;
    r.bound = -kInf;
  }
  return r;
}

std::pair<ProbeResult, ProbeResult> BnbEngine::probe_children(int cand_index) {
  const NodeRecord& node = *active_node_;
  const SolverSnapshot& snap = agg_;
  int var = snap.candidates.at(cand_index).var;
  return {solve_child(node, var, false), solve_child(node, var, true)};
}

void BnbEngine::build_snapshot(const NodeRecord& node,
                               SolverSnapshot* snap) const {
  // Candidates: fractional integer variables, increasing variable index.
  snap->candidates.clear();
  for (int j = 0; j < inst_.num_vars; ++j) {
    if (!inst_.is_integer[j]) continue;
    double x = node.lp_solution[j];
    if (std::abs(x - std::round(x)) <= cfg_.integrality_tol) continue;
    CandidateInfo cd;
    cd.var = j;
    cd.value = x;
    cd.basis = node.lp_basis[j];
    snap->candidates.push_back(cd);
  }

  snap->depth = node.depth;
  snap->node_bound = node.lp_bound;
  snap->child_side = node.child_side == ChildSide::kLeft    ? 0
                     : node.child_side == ChildSide::kRight ? 1
                                                            : 2;
  snap->num_fixed_integers = 0;
  for (int j = 0; j < inst_.num_vars; ++j)
    if (inst_.is_integer[j] && node.lower[j] == node.upper[j])
      ++snap->num_fixed_integers;

  // Branching path: walk the ancestor chain.
  std::set<int> distinct;
  int len = 0;
  for (std::int64_t id = node.id; nodes_[id].parent_id >= 0;
       id = nodes_[id].parent_id) {
    int var = nodes_[id].branch_var;
    distinct.insert(var);
    ++len;
    for (CandidateInfo& cd : snap->candidates)
      if (cd.var == var) ++cd.times_branched_on_path;
  }
  snap->path_length = len;
  snap->path_distinct_vars = static_cast<int>(distinct.size());

  snap->primal = current_primal();
  snap->dual = current_dual(&node);
  snap->gap = compute_gap(snap->primal, snap->dual);

  // Frontier includes the node being processed.
  snap->open_depths.clear();
  snap->open_bounds.clear();
  double best = kInf;
  int best_depth = node.depth;
  for (std::int64_t id : open_) {
    snap->open_depths.push_back(nodes_[id].depth);
    snap->open_bounds.push_back(nodes_[id].lp_bound);
    if (nodes_[id].lp_bound < best) {
      best = nodes_[id].lp_bound;
      best_depth = nodes_[id].depth;
    }
  }
  snap->open_depths.push_back(node.depth);
  snap->open_bounds.push_back(node.lp_bound);
  if (node.lp_bound < best) best_depth = node.depth;
  snap->best_bound_depth = best_depth;
  snap->explored = stats_.nodes_explored;
  snap->decisions = stats_.decisions;
  snap->pdi = stats_.pdi;
}

RunStats BnbEngine::run(BranchingPolicy& policy,
                        std::vector<DecisionEvent>* trajectory) {
  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  auto wall_seconds = [&] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  stats_ = RunStats{};
  auto solve_node_lp = [&](NodeRecord& node) {
    LpProblem p = lp_relaxation(inst_, node.lower, node.upper);
    LpOutcome out = solve_lp(p);
    if (out.status == LpStatus::kIterationLimit) {
      ++agg_.lp_limit_hits;
      throw Error("LP_ITERATION_LIMIT");
    }
    ++stats_.nodes_explored;
    ++agg_.lp_solves;
    agg_.lp_iter_sum += out.iterations;
    agg_.last_lp_iters = out.iterations;
    node.lp_bound = out.objective_value;
    node.lp_solution = std::move(out.solution);
    node.lp_basis = std::move(out.basis);
    return out.status;
  };

  // Root.
  NodeRecord root;
  root.id = 0;
  root.lower = inst_.lower_bounds;
  root.upper = inst_.upper_bounds;
  LpStatus root_status = solve_node_lp(root);
  agg_.root_bound = root.lp_bound;
  if (root_status == LpStatus::kInfeasible) {
    stats_.status = RunStatus::kInfeasible;
    return stats_;
  }
  if (root_status == LpStatus::kUnbounded) {
    stats_.status = RunStatus::kUnbounded;
    return stats_;
  }
  nodes_.push_back(std::move(root));
  open_.push_back(0);

  bool budget_hit = false;
  double last_gap = -1.0;  // <0 means "no previous decision"

  while (!open_.empty()) {
    if (stats_.nodes_explored >= cfg_.node_budget ||
        stats_.decisions >= cfg_.decision_budget ||
        (cfg_.wall_clock && wall_seconds() >= cfg_.time_budget)) {
      budget_hit = true;
      break;
    }

    // Best-bound selection, ties by lowest node id.
    std::size_t best_pos = 0;
    for (std::size_t i = 1; i < open_.size(); ++i) {
      const NodeRecord& a = nodes_[open_[i]];
      const NodeRecord& b = nodes_[open_[best_pos]];
      if (a.lp_bound < b.lp_bound ||
          (a.lp_bound == b.lp_bound && a.id < b.id))
        best_pos = i;
    }
    std::int64_t cur_id = open_[best_pos];
    open_.erase(open_.begin() + best_pos);
    NodeRecord cur = nodes_[cur_id];  // copy: nodes_ may reallocate below
    agg_.last_selected_bound = cur.lp_bound;
    agg_.plunge_depth =
        cur.parent_id >= 0 && cur.parent_id == last_branched_id_
            ? agg_.plunge_depth + 1
            : 0;

    auto close = [&](NodeStatus st) {
      nodes_[cur_id].status = st;
      nodes_[cur_id].lp_solution.clear();
      nodes_[cur_id].lp_basis.clear();
      nodes_[cur_id].lower.clear();
      nodes_[cur_id].upper.clear();
    };

    // The incumbent may have improved since this node was created.
    if (cur.lp_bound >= prune_level() - kPruneTol) {
      close(NodeStatus::kPrunedBound);
      ++agg_.n_pruned_bound;
      continue;
    }

    active_node_ = &cur;
    build_snapshot(cur, &agg_);
    if (agg_.candidates.empty()) {
      // Integral LP solution.
      if (cur.lp_bound < incumbent_) {
        incumbent_ = cur.lp_bound;
        incumbent_sol_ = cur.lp_solution;
      }
      close(NodeStatus::kFathomedIntegral);
      ++agg_.n_fathomed_integral;
      active_node_ = nullptr;
      continue;
    }

    double gap_before = agg_.gap;
    agg_.prev_gap = last_gap < 0 ? gap_before : last_gap;
    agg_.gap = gap_before;
    agg_.tau = cfg_.wall_clock
                   ? std::min(1.0, wall_seconds() / cfg_.time_budget)
                   : static_cast<double>(stats_.decisions) /
                         static_cast<double>(cfg_.decision_budget);
    std::int64_t open_before =
        static_cast<std::int64_t>(open_.size()) + 1;  // incl. current
    std::int64_t nodes_before = stats_.nodes_explored;
    double pdi_before = stats_.pdi;

    StateFeatures state = extract_features(agg_);
    DecisionContext dctx;
    dctx.snapshot = &agg_;
    dctx.engine = this;
    dctx.pseudocosts = &pseudocosts_;
    dctx.rng = &rng_;
    int action = policy.decide(state, dctx);
    if (action < 0 || action >= static_cast<int>(agg_.candidates.size()))
      throw Error("POLICY_RANGE", std::to_string(action));
    int var = agg_.candidates[action].var;
    double xstar = agg_.candidates[action].value;
    double frac = xstar - std::floor(xstar);

    if (cfg_.event_log) {
      (*cfg_.event_log) << "decision " << stats_.decisions << " node "
                        << cur.id << " depth " << cur.depth << " ncands "
                        << agg_.candidates.size() << " action " << action
                        << " clock " << format_real(stats_.clock) << "\n";
    }

    // Advance the decision clock; the gap held since the previous decision.
    stats_.gap_timeline.push_back({stats_.clock, gap_before});
    double new_clock =
        cfg_.wall_clock
            ? wall_seconds() / cfg_.time_budget
            : static_cast<double>(stats_.decisions + 1) /
                  static_cast<double>(cfg_.decision_budget);
    accumulate_pdi(stats_, gap_before, new_clock - stats_.clock);
    stats_.clock = new_clock;
    ++stats_.decisions;
    last_gap = gap_before;

    // History bookkeeping.
    nodes_[cur_id].branched_on = var;
    ++agg_.branched_var_counts[var];
    ++agg_.branchings;
    int bucket = cur.depth < 5 ? 0 : (cur.depth < 15 ? 1 : 2);
    ++agg_.branch_depth_buckets[bucket];
    last_branched_id_ = cur.id;

    // Children: x_var <= floor(x*) (left) and x_var >= ceil(x*) (right).
    int open_children = 0;
    bool valid_down = false, valid_up = false;
    double down_gain = 0, up_gain = 0;
    for (int side = 0; side < 2; ++side) {
      bool up = side == 1;
      NodeRecord child;
      child.id = static_cast<std::int64_t>(nodes_.size());
      child.parent_id = cur.id;
      child.depth = cur.depth + 1;
      child.branch_var = var;
      child.child_side = up ? ChildSide::kRight : ChildSide::kLeft;
      child.lower = cur.lower;
      child.upper = cur.upper;
      if (up)
        child.lower[var] = std::ceil(xstar);
      else
        child.upper[var] = std::floor(xstar);
      agg_.max_depth = std::max(agg_.max_depth, child.depth);

      LpStatus st = solve_node_lp(child);
      ++agg_.child_lps;
      if (st == LpStatus::kInfeasible) {
        ++agg_.child_lp_infeasible;
        child.status = NodeStatus::kPrunedInfeasible;
        ++agg_.n_pruned_infeasible;
        child.lp_solution.clear();
        child.lp_basis.clear();
        child.lower.clear();
        child.upper.clear();
        nodes_.push_back(std::move(child));
        continue;
      }
      if (st == LpStatus::kUnbounded) {
        stats_.status = RunStatus::kUnbounded;
        return stats_;
      }
      // Pseudocost update from the realized per-unit gain.
      double gain = child.lp_bound - cur.lp_bound;
      agg_.child_bound_change_sum += gain;
      double unit = gain / std::max(up ? 1.0 - frac : frac, 1e-6);
      if (up) {
        pseudocosts_.add_up(var, unit);
        valid_up = true;
        up_gain = std::max(gain, 0.0);
      } else {
        pseudocosts_.add_down(var, unit);
        valid_down = true;
        down_gain = std::max(gain, 0.0);
      }
      agg_.gain_sum += unit;
      agg_.gain_sq_sum += unit * unit;
      ++agg_.gain_count;

      if (child.lp_bound >= prune_level() - kPruneTol) {
        child.status = NodeStatus::kPrunedBound;
        ++agg_.n_pruned_bound;
        child.lp_solution.clear();
        child.lp_basis.clear();
        child.lower.clear();
        child.upper.clear();
        nodes_.push_back(std::move(child));
        continue;
      }
      bool integral = true;
      for (int j = 0; j < inst_.num_vars && integral; ++j)
        if (inst_.is_integer[j] &&
            std::abs(child.lp_solution[j] - std::round(child.lp_solution[j])) >
                cfg_.integrality_tol)
          integral = false;
      if (integral) {
        if (child.lp_bound < incumbent_) {
          incumbent_ = child.lp_bound;
          incumbent_sol_ = child.lp_solution;
        }
        child.status = NodeStatus::kFathomedIntegral;
        ++agg_.n_fathomed_integral;
        child.lp_solution.clear();
        child.lp_basis.clear();
        child.lower.clear();
        child.upper.clear();
        nodes_.push_back(std::move(child));
        continue;
      }
      child.status = NodeStatus::kOpen;
      ++open_children;
      open_.push_back(child.id);
      nodes_.push_back(std::move(child));
    }
    if (valid_down && valid_up) {
      agg_.last_gains_valid = true;
      agg_.last_down_gain = down_gain;
      agg_.last_up_gain = up_gain;
    }
    if (open_children == 0) ++agg_.both_children_fathomed;
    close(NodeStatus::kBranched);
    active_node_ = nullptr;

    if (trajectory) {
      DecisionEvent ev;
      ev.state = std::move(state);
      ev.action = action;
      ev.clock = stats_.clock;
      ev.tau = agg_.tau;
      ev.nodes_before = nodes_before;
      ev.nodes_after = stats_.nodes_explored;
      ev.gap_before = gap_before;
      ev.gap_after = compute_gap(current_primal(), current_dual(nullptr));
      ev.pdi_before = pdi_before;
      ev.pdi_after = stats_.pdi;
      ev.open_before = open_before;
      ev.open_after = static_cast<std::int64_t>(open_.size());
      trajectory->push_back(std::move(ev));
    }
  }

  if (budget_hit) {
    stats_.status = RunStatus::kTimeLimit;
    stats_.dual_bound = current_dual(nullptr);
  } else {
    stats_.status = RunStatus::kOptimal;
    stats_.dual_bound = current_primal();
  }
  stats_.best_objective = incumbent_;
  stats_.best_solution = incumbent_sol_;
  if (!cfg_.cutoff && !std::isfinite(incumbent_) && !budget_hit)
    stats_.status = RunStatus::kInfeasible;
  double final_gap = compute_gap(current_primal(), stats_.dual_bound);
  stats_.gap_timeline.push_back({stats_.clock, final_gap});
  policy.observe(stats_);
  return stats_;
}

RunStats run_bnb(const MilpInstance& inst, BranchingPolicy& policy,
                 const RunConfig& cfg, std::vector<DecisionEvent>* trajectory) {
  BnbEngine engine(inst, cfg);
  return engine.run(policy, trajectory);
}

}  // namespace tgb
