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

#include "tgbranch/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tgb {

namespace {

constexpr double kLogMillion = 13.815511557963774;  // ln(1 + 1e6)

double sanitize(double v) {
  if (!std::isfinite(v)) return 0.0;
  return std::clamp(v, -5.0, 5.0);
}

double frac_of(double x) { return x - std::floor(x); }

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

Eigen::MatrixXd candidate_features(const SolverSnapshot& ctx) {
  if (ctx.candidates.empty()) throw Error("EMPTY_CANDIDATES");
  const MilpInstance& inst = *ctx.instance;
  const PseudocostTable& pc = *ctx.pseudocosts;
  const int nc = static_cast<int>(ctx.candidates.size());

  double cmax = 0.0;
  for (double c : inst.objective) cmax = std::max(cmax, std::abs(c));
  double mean_up = pc.global_up_mean();
  double mean_down = pc.global_down_mean();

  // Per-row max |a_ik| and per-column entries.
  std::vector<double> row_max(inst.num_cons, 0.0);
  for (const MatrixEntry& e : inst.constraint_matrix)
    row_max[e.row] = std::max(row_max[e.row], std::abs(e.value));

  struct ColStat {
    int nnz = 0;
    double ratio_sum = 0.0;
    double ratio_max = 0.0;
  };
  std::vector<ColStat> col_stats(inst.num_vars);
  for (const MatrixEntry& e : inst.constraint_matrix) {
    ColStat& cs = col_stats[e.col];
    double r = row_max[e.row] > 0 ? std::abs(e.value) / row_max[e.row] : 0.0;
    cs.nnz += 1;
    cs.ratio_sum += r;
    cs.ratio_max = std::max(cs.ratio_max, r);
  }

  std::vector<double> prod_score(nc), up_score(nc), down_score(nc);
  for (int i = 0; i < nc; ++i) {
    const CandidateInfo& cd = ctx.candidates[i];
    double f = frac_of(cd.value);
    double psi_up = pc.up_mean(cd.var);
    double psi_down = pc.down_mean(cd.var);
    prod_score[i] = (psi_down * f) * (psi_up * (1.0 - f));
    up_score[i] = psi_up * (1.0 - f);
    down_score[i] = psi_down * f;
  }
  double prod_max = *std::max_element(prod_score.begin(), prod_score.end());
  double up_max = *std::max_element(up_score.begin(), up_score.end());
  double down_max = *std::max_element(down_score.begin(), down_score.end());

  // Fractionality rank: 0 = most fractional, ties by candidate order.
  std::vector<int> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double fa = frac_of(ctx.candidates[a].value);
    double fb = frac_of(ctx.candidates[b].value);
    return std::min(fa, 1 - fa) > std::min(fb, 1 - fb);
  });
  std::vector<int> rank(nc);
  for (int r = 0; r < nc; ++r) rank[order[r]] = r;

  Eigen::MatrixXd out(nc, kCandidateFeatureDim);
  for (int i = 0; i < nc; ++i) {
    const CandidateInfo& cd = ctx.candidates[i];
    const int j = cd.var;
    double f = frac_of(cd.value);
    double c = inst.objective[j];
    double l = inst.lower_bounds[j];
    double u = inst.upper_bounds[j];
    double range = u - l;
    bool bounded = std::isfinite(range);

    int k = 0;
    out(i, k++) = std::min(f, 1.0 - f);
    out(i, k++) = f;
    out(i, k++) = 1.0 - f;
    out(i, k++) = cmax > 0 ? c / cmax : 0.0;
    out(i, k++) = c > 0 ? 1.0 : (c < 0 ? -1.0 : 0.0);
    out(i, k++) = std::min(pc.up_mean(j) / (mean_up != 0 ? mean_up : 1.0), 5.0);
    out(i, k++) =
        std::min(pc.down_mean(j) / (mean_down != 0 ? mean_down : 1.0), 5.0);
    out(i, k++) = prod_max > 0 ? prod_score[i] / prod_max : 0.0;
    out(i, k++) = std::min(pc.up_count(j), 10) / 10.0;
    out(i, k++) = std::min(pc.down_count(j), 10) / 10.0;
    out(i, k++) = inst.num_cons > 0
                      ? static_cast<double>(col_stats[j].nnz) / inst.num_cons
                      : 0.0;
    out(i, k++) = bounded ? std::min(range, 100.0) / 100.0 : 1.0;
    out(i, k++) = bounded && range > 0
                      ? std::clamp((cd.value - l) / range, 0.0, 1.0)
                      : 0.5;
    out(i, k++) = bounded && range > 0
                      ? std::clamp((u - cd.value) / range, 0.0, 1.0)
                      : 0.5;
    out(i, k++) = std::floor(cd.value) == l ? 1.0 : 0.0;
    out(i, k++) = std::ceil(cd.value) == u ? 1.0 : 0.0;
    out(i, k++) = col_stats[j].nnz > 0
                      ? col_stats[j].ratio_sum / col_stats[j].nnz
                      : 0.0;
    out(i, k++) = col_stats[j].ratio_max;
    out(i, k++) =
        static_cast<double>(cd.times_branched_on_path) / (ctx.depth + 1.0);
    out(i, k++) = std::abs(cd.value - std::round(cd.value));
    out(i, k++) = up_max > 0 ? up_score[i] / up_max : 0.0;
    out(i, k++) = down_max > 0 ? down_score[i] / down_max : 0.0;
    out(i, k++) = (l == 0.0 && u == 1.0 && inst.is_integer[j]) ? 1.0 : 0.0;
    out(i, k++) = cd.basis == BasisStatus::kBasic ? 1.0 : 0.0;
    out(i, k++) = nc > 1 ? static_cast<double>(rank[i]) / (nc - 1) : 0.0;
  }
  for (int i = 0; i < nc; ++i)
    for (int k = 0; k < kCandidateFeatureDim; ++k) out(i, k) = sanitize(out(i, k));
  return out;
}

Eigen::VectorXd node_features(const SolverSnapshot& ctx) {
  Eigen::VectorXd v(kNodeFeatureDim);
  const int nc = static_cast<int>(ctx.candidates.size());
  int num_int = 0;
  if (ctx.instance)
    for (bool b : ctx.instance->is_integer) num_int += b;

  double mean_frac = 0.0;
  for (const CandidateInfo& cd : ctx.candidates) {
    double f = frac_of(cd.value);
    mean_frac += std::min(f, 1.0 - f);
  }
  if (nc > 0) mean_frac /= nc;

  v(0) = static_cast<double>(ctx.depth) / (1.0 + ctx.max_depth);
  v(1) = std::clamp((ctx.node_bound - ctx.dual) /
                        (ctx.primal - ctx.dual + 1e-10),
                    0.0, 1.0);
  v(2) = num_int > 0 ? static_cast<double>(nc) / num_int : 0.0;
  v(3) = std::tanh((ctx.node_bound - ctx.root_bound) /
                   (std::abs(ctx.root_bound) + 1.0));
  v(4) = ctx.child_side == 0 ? 0.0 : (ctx.child_side == 1 ? 1.0 : 0.5);
  v(5) = static_cast<double>(ctx.plunge_depth) / (ctx.depth + 1.0);
  v(6) = num_int > 0 ? static_cast<double>(ctx.num_fixed_integers) / num_int
                     : 0.0;
  v(7) = mean_frac;
  for (int i = 0; i < kNodeFeatureDim; ++i) v(i) = sanitize(v(i));
  return v;
}

Eigen::VectorXd tree_features(const SolverSnapshot& ctx) {
  Eigen::VectorXd v(kTreeFeatureDim);
  int k = 0;
  const double open = static_cast<double>(ctx.open_bounds.size());
  const double explored = static_cast<double>(ctx.explored);
  const double max_depth = std::max(1, ctx.max_depth);

  // A. bounds & gap (6)
  v(k++) = ctx.gap;
  v(k++) = std::isfinite(ctx.primal)
               ? std::tanh(ctx.primal / (1.0 + std::abs(ctx.primal)))
               : 0.0;
  v(k++) = std::isfinite(ctx.dual)
               ? std::tanh(ctx.dual / (1.0 + std::abs(ctx.dual)))
               : 0.0;
  v(k++) = ctx.gap - ctx.prev_gap;
  v(k++) = ctx.best_bound_depth / max_depth;
  v(k++) = ctx.tau;

  // B. tree shape (10)
  double denom_nodes = std::max<double>(1.0, explored);
  v(k++) = std::min(1.0, std::log1p(explored) / kLogMillion);
  v(k++) = open + explored > 0 ? open / (open + explored) : 0.0;
  v(k++) = std::min(ctx.max_depth / 64.0, 1.0);
  std::vector<double> open_depths_d(ctx.open_depths.begin(),
                                    ctx.open_depths.end());
  v(k++) = mean_of(open_depths_d) / max_depth;
  v(k++) = std_of(open_depths_d) / max_depth;
  v(k++) = ctx.n_pruned_bound / denom_nodes;
  v(k++) = ctx.n_pruned_infeasible / denom_nodes;
  v(k++) = ctx.n_fathomed_integral / denom_nodes;
  {
    double near = 0.0;
    for (double b : ctx.open_bounds)
      if (std::abs(b - ctx.dual) <= 0.01 * std::max(1.0, std::abs(ctx.dual)))
        near += 1.0;
    v(k++) = open > 0 ? near / open : 0.0;
  }
  v(k++) = ctx.depth / max_depth;

  // C. frontier bounds (8); empty frontier -> mid-range convention.
  {
    double denom = ctx.primal - ctx.dual;
    bool normable = std::isfinite(ctx.primal) && std::isfinite(ctx.dual) &&
                    denom > 1e-12;
    auto norm = [&](double b) {
      if (!normable) return 0.5;
      return std::clamp((b - ctx.dual) / denom, 0.0, 1.0);
    };
    if (ctx.open_bounds.empty()) {
      for (int i = 0; i < 7; ++i) v(k++) = 0.5;
    } else {
      std::vector<double> nb;
      nb.reserve(ctx.open_bounds.size());
      for (double b : ctx.open_bounds) nb.push_back(norm(b));
      std::sort(nb.begin(), nb.end());
      v(k++) = nb.front();
      v(k++) = mean_of(nb);
      v(k++) = nb.back();
      v(k++) = std_of(nb);
      v(k++) = quantile(nb, 0.25);
      v(k++) = quantile(nb, 0.75);
      v(k++) = norm(ctx.last_selected_bound);
    }
    v(k++) = std::min(1.0, std::log1p(open) / kLogMillion);
  }

  // D. pseudocost aggregates (12)
  {
    const PseudocostTable& pc = *ctx.pseudocosts;
    const MilpInstance& inst = *ctx.instance;
    std::vector<double> ups, downs;
    int num_int = 0, rel_up = 0, rel_down = 0, uninit = 0;
    double rel_count_sum = 0.0;
    for (int j = 0; j < inst.num_vars; ++j) {
      if (!inst.is_integer[j]) continue;
      ++num_int;
      if (pc.up_count(j) > 0) ups.push_back(pc.up_mean(j));
      if (pc.down_count(j) > 0) downs.push_back(pc.down_mean(j));
      if (pc.up_count(j) >= 8) ++rel_up;
      if (pc.down_count(j) >= 8) ++rel_down;
      if (pc.up_count(j) == 0 && pc.down_count(j) == 0) ++uninit;
      rel_count_sum +=
          std::min(std::min(pc.up_count(j), pc.down_count(j)), 10) / 10.0;
    }
    double ni = std::max(1, num_int);
    v(k++) = mean_of(ups);
    v(k++) = std_of(ups);
    v(k++) = ups.empty() ? 0.0 : *std::max_element(ups.begin(), ups.end());
    v(k++) = mean_of(downs);
    v(k++) = std_of(downs);
    v(k++) = downs.empty() ? 0.0 : *std::max_element(downs.begin(), downs.end());
    v(k++) = rel_up / ni;
    v(k++) = rel_down / ni;
    v(k++) = rel_count_sum / ni;
    v(k++) = uninit / ni;
    std::vector<double> scores;
    for (const CandidateInfo& cd : ctx.candidates) {
      double f = frac_of(cd.value);
      scores.push_back((pc.down_mean(cd.var) * f) *
                       (pc.up_mean(cd.var) * (1.0 - f)));
    }
    v(k++) = mean_of(scores);
    v(k++) =
        scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  }

  // E. branching history (9)
  {
    double dec = std::max<double>(1.0, static_cast<double>(ctx.decisions));
    v(k++) = ctx.branch_depth_buckets[0] / dec;
    v(k++) = ctx.branch_depth_buckets[1] / dec;
    v(k++) = ctx.branch_depth_buckets[2] / dec;
    double gmean = ctx.gain_count > 0 ? ctx.gain_sum / ctx.gain_count : 0.0;
    double gvar = ctx.gain_count > 0
                      ? std::max(0.0, ctx.gain_sq_sum / ctx.gain_count -
                                          gmean * gmean)
                      : 0.0;
    v(k++) = std::tanh(gmean);
    v(k++) = std::tanh(std::sqrt(gvar));
    v(k++) = ctx.branchings > 0 ? static_cast<double>(
                                      ctx.both_children_fathomed) /
                                      ctx.branchings
                                : 0.0;
    v(k++) = ctx.path_length > 0
                 ? 1.0 - static_cast<double>(ctx.path_distinct_vars) /
                             ctx.path_length
                 : 0.0;
    {
      // Normalized entropy of the branched-variable histogram.
      double total = 0.0;
      int distinct = 0;
      for (std::int64_t c : ctx.branched_var_counts) {
        total += static_cast<double>(c);
        distinct += c > 0;
      }
      double h = 0.0;
      if (distinct > 1) {
        for (std::int64_t c : ctx.branched_var_counts) {
          if (c <= 0) continue;
          double p = static_cast<double>(c) / total;
          h -= p * std::log(p);
        }
        h /= std::log(static_cast<double>(distinct));
      }
      v(k++) = h;
    }
    v(k++) = ctx.last_gains_valid
                 ? std::tanh(std::log((ctx.last_down_gain + 1e-9) /
                                      (ctx.last_up_gain + 1e-9)))
                 : 0.0;
  }

  // F. LP statistics (5)
  {
    double solves = std::max<double>(1.0, static_cast<double>(ctx.lp_solves));
    v(k++) = (ctx.lp_iter_sum / solves) / 1000.0;
    v(k++) = ctx.last_lp_iters / 1000.0;
    v(k++) = ctx.child_lps > 0 ? static_cast<double>(ctx.child_lp_infeasible) /
                                     ctx.child_lps
                               : 0.0;
    v(k++) = ctx.child_lps > 0
                 ? std::tanh(ctx.child_bound_change_sum / ctx.child_lps)
                 : 0.0;
    v(k++) = ctx.lp_limit_hits / solves;
  }

  // G. progress (3)
  v(k++) = static_cast<double>(ctx.decisions) /
           std::max<std::int64_t>(1, ctx.decision_budget);
  v(k++) = std::tanh(ctx.pdi / (ctx.baseline_pdi + 1e-10));
  v(k++) = std::isfinite(ctx.primal) ? 1.0 : 0.0;

  for (int i = 0; i < kTreeFeatureDim; ++i) v(i) = sanitize(v(i));
  return v;
}

StateFeatures extract_features(const SolverSnapshot& ctx) {
  StateFeatures f;
  f.candidates = candidate_features(ctx);
  f.node = node_features(ctx);
  f.tree = tree_features(ctx);
  f.pad_mask.assign(ctx.candidates.size(), false);
  for (const CandidateInfo& cd : ctx.candidates)
    f.candidate_var_ids.push_back(cd.var);
  return f;
}

StateFeatures pad_features(const StateFeatures& f, int extra) {
  StateFeatures out = f;
  int rows = static_cast<int>(f.candidates.rows());
  out.candidates = Eigen::MatrixXd::Zero(rows + extra, kCandidateFeatureDim);
  out.candidates.topRows(rows) = f.candidates;
  out.pad_mask.resize(rows + extra, true);
  return out;
}

}  // namespace tgb
