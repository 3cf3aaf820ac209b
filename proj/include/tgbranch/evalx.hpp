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

#ifndef TGBRANCH_EVALX_HPP_
#define TGBRANCH_EVALX_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tgbranch/rewards.hpp"

namespace tgb {

struct ResultRow {
  std::string instance;
  std::uint64_t seed = 0;
  std::string policy;
  std::int64_t nodes = 0;
  double pdi = 0.0;
  RunStatus status = RunStatus::kOptimal;
  double clock = 0.0;
};

// CSV `instance,seed,policy,nodes,pdi,status,clock`.
std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::vector<ResultRow> read_results_csv(const std::string& path);
void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows);

inline constexpr double kNodeShift = 100.0;
inline constexpr double kPdiFloor = 1e-9;

// Shifted geometric mean exp[(1/m) sum ln(x + S)] - S.
// Throws Error: EMPTY_INPUT, NONPOSITIVE_SHIFTED.
double sgm(const std::vector<double>& values, double shift);
double sgm_nodes(const std::vector<double>& values);  // S = 100
double sgm_pdi(const std::vector<double>& values);    // S = 0, floored

// 0.6 * SGM(nodes) + 0.4 * SGM(pdi); with no completed runs the score is
// the PDI component alone at weight 1.
double composite_score(const std::vector<double>& node_values,
                       const std::vector<double>& pdi_values);

enum class Metric { kNodes, kPdi };

struct WinRateEntry {
  std::string instance;
  double sgm_a = 0.0;
  double sgm_b = 0.0;
  bool win = false;  // strict: sgm_a < sgm_b
};
struct WinRateResult {
  double fraction = 0.0;
  std::vector<WinRateEntry> table;
};

// Per-instance SGM over seeds; both row sets must cover the identical
// (instance, seed) grid.  Throws Error(GRID_MISMATCH).
WinRateResult win_rate(const std::vector<ResultRow>& rows_a,
                       const std::vector<ResultRow>& rows_b, Metric metric);

// Average ranks 1..k of one observation row, ties averaged, low value first.
std::vector<double> average_ranks(const std::vector<double>& values);

struct FriedmanResult {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
  std::vector<double> mean_ranks;
};
// ranks: n instances x k policies.  Throws Error(DEGENERATE).
FriedmanResult friedman(const std::vector<std::vector<double>>& ranks);

// Upper-tail chi-square probability (regularized upper incomplete gamma).
double chi2_survival(double x, int df);

struct WilcoxonResult {
  double w = 0.0;  // positive-rank sum
  double p = 1.0;  // one-sided, alternative LESS (diffs < 0)
  int n = 0;       // non-zero pairs
  bool exact = false;
};
// Zero diffs dropped; exact enumeration for n <= 12, else normal
// approximation with continuity and tie correction.
// Throws Error(TOO_FEW_PAIRS) for n < 5.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Markdown report: per-baseline win-rate table (nodes and PDI columns),
// Friedman omnibus block over dual-criterion ranks, and paired Wilcoxon
// lines for `learned` against every other policy.
std::string make_report(const std::vector<ResultRow>& rows,
                        const std::string& learned);

}  // namespace tgb

#endif  // TGBRANCH_EVALX_HPP_
