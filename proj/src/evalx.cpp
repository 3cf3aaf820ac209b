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

#include "tgbranch/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace tgb {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "instance,seed,policy,nodes,pdi,status,clock\n";
  for (const ResultRow& r : rows) {
    os << r.instance << ',' << r.seed << ',' << r.policy << ',' << r.nodes
       << ',' << format_real(r.pdi) << ',' << run_status_name(r.status) << ','
       << format_real(r.clock) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<ResultRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "instance,seed,policy,nodes,pdi,status,clock")
        throw Error("BAD_RESULTS", line);
      continue;
    }
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7) throw Error("BAD_RESULTS", line);
    ResultRow r;
    r.instance = f[0];
    r.seed = std::stoull(f[1]);
    r.policy = f[2];
    r.nodes = std::stoll(f[3]);
    r.pdi = parse_real(f[4]);
    r.status = parse_run_status(f[5]);
    r.clock = parse_real(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str());
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("IO_ERROR", path);
  out << results_csv(rows);
}

double sgm(const std::vector<double>& values, double shift) {
  if (values.empty()) throw Error("EMPTY_INPUT");
  double acc = 0.0;
  for (double x : values) {
    double shifted = x + shift;
    if (shifted <= 0.0) throw Error("NONPOSITIVE_SHIFTED", format_real(x));
    acc += std::log(shifted);
  }
  return std::exp(acc / values.size()) - shift;
}

double sgm_nodes(const std::vector<double>& values) {
  return sgm(values, kNodeShift);
}

double sgm_pdi(const std::vector<double>& values) {
  std::vector<double> floored = values;
  for (double& x : floored) x = std::max(x, kPdiFloor);
  return sgm(floored, 0.0);
}

double composite_score(const std::vector<double>& node_values,
                       const std::vector<double>& pdi_values) {
  if (node_values.empty()) return sgm_pdi(pdi_values);
  return 0.6 * sgm_nodes(node_values) + 0.4 * sgm_pdi(pdi_values);
}

WinRateResult win_rate(const std::vector<ResultRow>& rows_a,
                       const std::vector<ResultRow>& rows_b, Metric metric) {
  auto grid = [](const std::vector<ResultRow>& rows) {
    std::set<std::pair<std::string, std::uint64_t>> g;
    for (const ResultRow& r : rows)
      if (!g.insert({r.instance, r.seed}).second)
        throw Error("GRID_MISMATCH", "duplicate " + r.instance);
    return g;
  };
  if (grid(rows_a) != grid(rows_b)) throw Error("GRID_MISMATCH");

  auto by_instance = [metric](const std::vector<ResultRow>& rows) {
    std::map<std::string, std::vector<double>> g;
    for (const ResultRow& r : rows)
      g[r.instance].push_back(metric == Metric::kNodes
                                  ? static_cast<double>(r.nodes)
                                  : r.pdi);
    return g;
  };
  std::map<std::string, std::vector<double>> a = by_instance(rows_a);
  std::map<std::string, std::vector<double>> b = by_instance(rows_b);

  WinRateResult res;
  for (const auto& [inst, va] : a) {
    WinRateEntry e;
    e.instance = inst;
    e.sgm_a = metric == Metric::kNodes ? sgm_nodes(va) : sgm_pdi(va);
    e.sgm_b = metric == Metric::kNodes ? sgm_nodes(b.at(inst))
                                       : sgm_pdi(b.at(inst));
    e.win = e.sgm_a < e.sgm_b;
    res.table.push_back(std::move(e));
  }
  int wins = 0;
  for (const WinRateEntry& e : res.table) wins += e.win;
  res.fraction =
      res.table.empty() ? 0.0 : static_cast<double>(wins) / res.table.size();
  return res;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::size_t k = values.size();
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return values[i] < values[j]; });
  std::vector<double> ranks(k, 0.0);
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i;
    while (j + 1 < k && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Regularized incomplete gamma, lower series and upper continued fraction.
namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a, sum = term, ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_survival(double x, int df) {
  if (x <= 0.0) return 1.0;
  double a = df / 2.0, half = x / 2.0;
  if (half < a + 1.0) return 1.0 - gamma_p_series(a, half);
  return gamma_q_cf(a, half);
}

FriedmanResult friedman(const std::vector<std::vector<double>>& ranks) {
  std::size_t n = ranks.size();
  if (n < 2) throw Error("DEGENERATE", "n");
  std::size_t k = ranks[0].size();
  if (k < 2) throw Error("DEGENERATE", "k");
  std::vector<double> colsum(k, 0.0);
  for (const std::vector<double>& row : ranks) {
    if (row.size() != k) throw Error("DEGENERATE", "ragged");
    for (std::size_t j = 0; j < k; ++j) colsum[j] += row[j];
  }
  double sumsq = 0.0;
  for (double r : colsum) sumsq += r * r;
  FriedmanResult res;
  double dn = static_cast<double>(n), dk = static_cast<double>(k);
  res.chi2 = 12.0 / (dn * dk * (dk + 1.0)) * sumsq - 3.0 * dn * (dk + 1.0);
  res.df = static_cast<int>(k) - 1;
  res.p = chi2_survival(res.chi2, res.df);
  for (double r : colsum) res.mean_ranks.push_back(r / dn);
  return res;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double x : diffs)
    if (x != 0.0) d.push_back(x);
  int n = static_cast<int>(d.size());
  if (n < 5) throw Error("TOO_FEW_PAIRS", std::to_string(n));

  std::vector<double> absd(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) absd[i] = std::fabs(d[i]);
  std::vector<double> ranks = average_ranks(absd);

  WilcoxonResult res;
  res.n = n;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) res.w += ranks[i];

  if (n <= 12) {
    res.exact = true;
    // Null distribution by full sign enumeration; ties share average ranks.
    std::int64_t total = std::int64_t{1} << n;
    std::int64_t at_or_below = 0;
    for (std::int64_t mask = 0; mask < total; ++mask) {
      double w = 0.0;
      for (int i = 0; i < n; ++i)
        if (mask & (std::int64_t{1} << i)) w += ranks[i];
      if (w <= res.w + 1e-12) ++at_or_below;
    }
    res.p = static_cast<double>(at_or_below) / static_cast<double>(total);
  } else {
    double dn = n;
    double mean = dn * (dn + 1.0) / 4.0;
    double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    // Tie correction: subtract sum(t^3 - t)/48 per tied group.
    std::vector<double> sorted = absd;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      var -= (t * t * t - t) / 48.0;
      i = j + 1;
    }
    double z = (res.w - mean + 0.5) / std::sqrt(var);
    res.p = 0.5 * std::erfc(-z / std::sqrt(2.0));
  }
  return res;
}

// --- Report -----------------------------------------------------------------

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

std::string sig(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

}  // namespace

std::string make_report(const std::vector<ResultRow>& rows,
                        const std::string& learned) {
  std::map<std::string, std::vector<ResultRow>> by_policy;
  for (const ResultRow& r : rows) by_policy[r.policy].push_back(r);
  if (!by_policy.count(learned)) throw Error("UNKNOWN_POLICY", learned);

  std::ostringstream os;
  os << "# Evaluation report\n\n";
  os << "Policies: " << by_policy.size() << ", rows: " << rows.size()
     << "\n\n";

  os << "## Win rates of " << learned << "\n\n";
  os << "| baseline | % win (Nnodes) | % win (PDI) |\n";
  os << "|---|---|---|\n";
  for (const auto& [policy, theirs] : by_policy) {
    if (policy == learned) continue;
    WinRateResult wn = win_rate(by_policy.at(learned), theirs, Metric::kNodes);
    WinRateResult wp = win_rate(by_policy.at(learned), theirs, Metric::kPdi);
    os << "| " << policy << " | " << pct(wn.fraction) << " | "
       << pct(wp.fraction) << " |\n";
  }
  os << '\n';

  // Dual criterion: instances solved by every policy rank on nodes, the
  // rest on PDI.
  std::set<std::string> instances;
  for (const ResultRow& r : rows) instances.insert(r.instance);
  std::vector<std::string> policies;
  for (const auto& [policy, unused] : by_policy) policies.push_back(policy);

  std::vector<std::vector<double>> rank_rows;
  std::map<std::string, std::vector<double>> scores_by_policy;
  for (const std::string& inst : instances) {
    bool all_solved = true;
    for (const ResultRow& r : rows)
      if (r.instance == inst && r.status != RunStatus::kOptimal)
        all_solved = false;
    std::vector<double> values;
    for (const std::string& policy : policies) {
      std::vector<double> metric;
      for (const ResultRow& r : by_policy.at(policy))
        if (r.instance == inst)
          metric.push_back(all_solved ? static_cast<double>(r.nodes) : r.pdi);
      double s = all_solved ? sgm_nodes(metric) : sgm_pdi(metric);
      values.push_back(s);
      scores_by_policy[policy].push_back(s);
    }
    rank_rows.push_back(average_ranks(values));
  }

  os << "## Rank statistics\n\n";
  if (rank_rows.size() >= 2 && policies.size() >= 2) {
    FriedmanResult fr = friedman(rank_rows);
    os << "Friedman chi2 (df), p: " << sig(fr.chi2) << " (" << fr.df << "), "
       << sig(fr.p) << "\n\n";
    os << "| policy | mean rank |\n|---|---|\n";
    for (std::size_t j = 0; j < policies.size(); ++j)
      os << "| " << policies[j] << " | " << sig(fr.mean_ranks[j]) << " |\n";
    os << '\n';
  } else {
    os << "Too few instances for the omnibus test.\n\n";
  }

  os << "## Paired Wilcoxon (" << learned << " lower)\n\n";
  os << "| baseline | n | W | p (one-sided) |\n|---|---|---|---|\n";
  for (std::size_t j = 0; j < policies.size(); ++j) {
    if (policies[j] == learned) continue;
    std::size_t li = std::find(policies.begin(), policies.end(), learned) -
                     policies.begin();
    std::vector<double> diffs;
    for (std::size_t i = 0; i < rank_rows.size(); ++i)
      diffs.push_back(scores_by_policy[learned][i] -
                      scores_by_policy[policies[j]][i]);
    (void)li;
    try {
      WilcoxonResult w = wilcoxon_signed_rank(diffs);
      os << "| " << policies[j] << " | " << w.n << " | " << sig(w.w) << " | "
         << sig(w.p) << " |\n";
    } catch (const Error& e) {
      os << "| " << policies[j] << " | - | - | " << e.code() << " |\n";
    }
  }
  os << '\n';
  return os.str();
}

}  // namespace tgb
