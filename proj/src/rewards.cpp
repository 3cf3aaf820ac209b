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

#include "tgbranch/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tgbranch/error.hpp"

namespace tgb {
namespace {

double tanh_s(double s, double x) { return std::tanh(s * x); }

double ratio_c(double a, double b, double c) {
  return std::min(a / std::max(b, 1e-12), c);
}

double clip1(double x) { return std::clamp(x, -1.0, 1.0); }

// Log-scaled node efficiency; zero when n_t equals the baseline count.
double efficiency(const RewardState& rs, const BaselineStats& bs,
                  double beta) {
  return tanh_s(beta, 1.0 - std::log1p(rs.n_t) / std::log1p(bs.nodes));
}

// Pace: positive while n_t trails the baseline schedule B * tau^rho.
double pace(const RewardState& rs, const BaselineStats& bs, double beta,
            double rho) {
  double sched = bs.nodes * std::pow(rs.tau, rho);
  return tanh_s(beta, (sched - rs.n_t) / (sched + 1.0));
}

double gap_delta(const RewardState& rs) {
  if (rs.t <= 0) return 0.0;
  return std::tanh((rs.gap_prev - rs.gap_t) /
                   (std::fabs(rs.gap_prev) + 1e-9));
}

double pdi_delta(const RewardState& rs, const BaselineStats& bs) {
  return std::tanh((rs.pdi_prev - rs.pdi_t) / std::max(bs.pdi0, 1e-9));
}

// Frontier-shrinkage progress term.
double progress(const RewardState& rs) {
  return std::tanh((rs.open_prev - rs.open_t) / (rs.open_prev + 1.0));
}

double speedup(double baseline_nodes, double n_terminal) {
  return ratio_c(baseline_nodes, n_terminal, 3.0);
}

double gap_closure(const RewardState& rs, const BaselineStats& bs) {
  return std::tanh(bs.gap0 - rs.gap_t);
}

double pdi_closure(const RewardState& rs, const BaselineStats& bs) {
  return std::tanh((bs.pdi0 - rs.pdi_t) / std::max(bs.pdi0, 1e-9));
}

}  // namespace

RewardSignal parse_reward_signal(const std::string& name) {
  if (name == "H1") return RewardSignal::kH1;
  if (name == "H2") return RewardSignal::kH2;
  if (name == "H3") return RewardSignal::kH3;
  throw Error("UNKNOWN_REWARD", name);
}

std::string reward_signal_name(RewardSignal s) {
  switch (s) {
    case RewardSignal::kH1: return "H1";
    case RewardSignal::kH2: return "H2";
    case RewardSignal::kH3: return "H3";
  }
  throw Error("UNKNOWN_REWARD");
}

double h1_step(const RewardState& rs, const BaselineStats& bs) {
  return -std::tanh(rs.dn_t / (0.02 * bs.nodes + 1.0));
}

double h1_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs) {
  double s = speedup(bs.nodes, n_terminal);
  switch (status) {
    case RunStatus::kOptimal:
      return 1.0 + 2.0 * s;
    case RunStatus::kInfeasible:
    case RunStatus::kUnbounded:
      return 0.5 + 1.5 * s;
    case RunStatus::kTimeLimit:
      return 0.2 * s + 0.6 * gap_closure(rs, bs) + 0.2 * pdi_closure(rs, bs);
  }
  return 0.2 * s;
}

double h2_step(const RewardState& rs, const BaselineStats& bs) {
  const double beta = 1.5, rho = 0.7;
  return clip1(0.5 * efficiency(rs, bs, beta) + 0.2 * pace(rs, bs, beta, rho) +
               0.2 * gap_delta(rs) + 0.1 * pdi_delta(rs, bs));
}

double h2_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs) {
  double s = speedup(bs.nodes, n_terminal);
  switch (status) {
    case RunStatus::kOptimal:
      return 1.0 + 2.5 * s;
    case RunStatus::kInfeasible:
    case RunStatus::kUnbounded:
      return 0.7 + 2.0 * s;
    case RunStatus::kTimeLimit:
      return 0.4 * s + 0.4 * gap_closure(rs, bs) + 0.2 * pdi_closure(rs, bs);
  }
  return 0.3 * s;
}

H3Weights h3_weights(double baseline_nodes) {
  H3Weights w;
  double x = (std::log1p(baseline_nodes) - std::log(2.0)) /
             (std::log1p(1e6) - std::log(2.0));
  double d = 1.0 / (1.0 + std::exp(-x));
  w.difficulty = d;
  w.nodes = 0.55 * (1.0 - d) + 0.25 * d;
  w.gap = 0.10 * (1.0 - d) + 0.30 * d;
  w.pdi = 0.05 * (1.0 - d) + 0.20 * d;
  w.pace = 0.15 * (1.0 - d) + 0.10 * d;
  w.prog = 0.15;
  return w;
}

double h3_step(const RewardState& rs, const BaselineStats& bs,
               const H3Weights& w) {
  const double beta = 1.5, rho = 0.7;
  // The gap drag uses the episode-initial gap, not the baseline's.
  double drag = tanh_s(0.5, rs.gap_t / (rs.gap0 + 1e-9));
  return clip1(w.nodes * efficiency(rs, bs, beta) +
               w.pace * pace(rs, bs, beta, rho) - w.gap * drag +
               w.pdi * pdi_delta(rs, bs) + w.prog * progress(rs));
}

double h3_terminal(RunStatus status, double n_terminal, const RewardState& rs,
                   const BaselineStats& bs) {
  double s = speedup(bs.nodes, n_terminal);
  switch (status) {
    case RunStatus::kOptimal:
      return 1.0 + 3.0 * s;
    case RunStatus::kInfeasible:
    case RunStatus::kUnbounded:
      return 0.8 + 2.0 * s;
    case RunStatus::kTimeLimit:
      return 0.5 * s + 0.3 * gap_closure(rs, bs) + 0.2 * pdi_closure(rs, bs);
  }
  return 0.3 * s;
}

double step_reward(RewardSignal sig, const RewardState& rs,
                   const BaselineStats& bs) {
  switch (sig) {
    case RewardSignal::kH1: return h1_step(rs, bs);
    case RewardSignal::kH2: return h2_step(rs, bs);
    case RewardSignal::kH3: return h3_step(rs, bs, h3_weights(bs.nodes));
  }
  throw Error("UNKNOWN_REWARD");
}

double terminal_reward(RewardSignal sig, RunStatus status, double n_terminal,
                       const RewardState& rs, const BaselineStats& bs) {
  switch (sig) {
    case RewardSignal::kH1: return h1_terminal(status, n_terminal, rs, bs);
    case RewardSignal::kH2: return h2_terminal(status, n_terminal, rs, bs);
    case RewardSignal::kH3: return h3_terminal(status, n_terminal, rs, bs);
  }
  throw Error("UNKNOWN_REWARD");
}

// --- Baseline acquisition ---------------------------------------------------

std::string run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kOptimal: return "OPTIMAL";
    case RunStatus::kTimeLimit: return "TIMELIMIT";
    case RunStatus::kInfeasible: return "INFEASIBLE";
    case RunStatus::kUnbounded: return "UNBOUNDED";
  }
  throw Error("UNKNOWN_STATUS");
}

RunStatus parse_run_status(const std::string& name) {
  if (name == "OPTIMAL") return RunStatus::kOptimal;
  if (name == "TIMELIMIT") return RunStatus::kTimeLimit;
  if (name == "INFEASIBLE") return RunStatus::kInfeasible;
  if (name == "UNBOUNDED") return RunStatus::kUnbounded;
  throw Error("UNKNOWN_STATUS", name);
}

std::vector<BaselineStats> read_baseline_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<BaselineStats> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "instance,seed,baseline_nodes,gap0,pdi0,status")
        throw Error("BAD_MANIFEST", path);
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw Error("BAD_MANIFEST", line);
    BaselineStats bs;
    bs.instance = fields[0];
    bs.seed = std::stoull(fields[1]);
    bs.nodes = parse_real(fields[2]);
    bs.gap0 = parse_real(fields[3]);
    bs.pdi0 = parse_real(fields[4]);
    bs.status = parse_run_status(fields[5]);
    rows.push_back(std::move(bs));
  }
  return rows;
}

void write_baseline_manifest(const std::string& path,
                             const std::vector<BaselineStats>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("IO_ERROR", path);
  out << "instance,seed,baseline_nodes,gap0,pdi0,status\n";
  for (const BaselineStats& bs : rows) {
    out << bs.instance << ',' << bs.seed << ',' << format_real(bs.nodes)
        << ',' << format_real(bs.gap0) << ',' << format_real(bs.pdi0) << ','
        << run_status_name(bs.status) << '\n';
  }
  if (!out) throw Error("IO_ERROR", path);
}

BaselineStats acquire_baseline(const MilpInstance& inst, std::uint64_t seed,
                               const RunConfig& cfg,
                               const std::string& manifest_path) {
  std::vector<BaselineStats> cached;
  if (!manifest_path.empty()) {
    cached = read_baseline_manifest(manifest_path);
    for (const BaselineStats& bs : cached)
      if (bs.instance == inst.name && bs.seed == seed) return bs;
  }

  RunConfig run_cfg = cfg;
  run_cfg.seed = seed;
  auto policy = make_baseline_policy("relpscost", seed);
  std::vector<DecisionEvent> traj;
  RunStats stats = run_bnb(inst, *policy, run_cfg, &traj);

  BaselineStats bs;
  bs.instance = inst.name;
  bs.seed = seed;
  bs.nodes = static_cast<double>(std::max<std::int64_t>(1, stats.nodes_explored));
  if (!traj.empty()) {
    bs.gap0 = traj.front().gap_before;
  } else if (!stats.gap_timeline.empty()) {
    bs.gap0 = stats.gap_timeline.front().gap;
  } else {
    bs.gap0 = 1.0;
  }
  bs.pdi0 = stats.pdi;
  bs.status = stats.status;

  if (!manifest_path.empty()) {
    cached.push_back(bs);
    write_baseline_manifest(manifest_path, cached);
  }
  return bs;
}

}  // namespace tgb
