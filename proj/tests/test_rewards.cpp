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

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "doctest.h"
#include "tgbranch/rewards.hpp"

namespace {

tgb::MilpInstance knapsack2() {
  tgb::MilpInstance inst;
  inst.name = "knap2";
  inst.num_vars = 2;
  inst.num_cons = 1;
  inst.objective = {-3.0, -4.0};
  inst.constraint_matrix = {{0, 0, 2.0}, {0, 1, 3.0}};
  inst.row_senses = {tgb::RowSense::kLe};
  inst.rhs = {4.0};
  inst.lower_bounds = {0.0, 0.0};
  inst.upper_bounds = {1.0, 1.0};
  inst.is_integer = {true, true};
  return inst;
}

tgb::BaselineStats base(double nodes, double gap0 = 1.0, double pdi0 = 1.0) {
  tgb::BaselineStats bs;
  bs.instance = "t";
  bs.nodes = nodes;
  bs.gap0 = gap0;
  bs.pdi0 = pdi0;
  return bs;
}

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("node-efficiency step penalty oracles") {
  tgb::RewardState rs;
  rs.dn_t = 0.0;
  CHECK(tgb::h1_step(rs, base(50.0)) == 0.0);
  rs.dn_t = 2.0;
  // 2 / (0.02 * 50 + 1) = 1.
  CHECK(tgb::h1_step(rs, base(50.0)) ==
        doctest::Approx(-std::tanh(1.0)).epsilon(1e-12));
  CHECK(tgb::h1_step(rs, base(50.0)) == doctest::Approx(-0.761594).epsilon(1e-6));
  rs.dn_t = 1e9;
  double r = tgb::h1_step(rs, base(50.0));
  // tanh saturates to 1.0 exactly in double precision here.
  CHECK(r >= -1.0);
  CHECK(r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("node-efficiency terminal bonus oracles") {
  tgb::RewardState rs;
  rs.gap_t = 1.0;
  rs.pdi_t = 1.0;
  CHECK(tgb::h1_terminal(tgb::RunStatus::kOptimal, 50.0, rs, base(50.0)) ==
        doctest::Approx(3.0).epsilon(1e-12));
  // n_T = B/10 hits the speedup cap s = 3.
  CHECK(tgb::h1_terminal(tgb::RunStatus::kOptimal, 5.0, rs, base(50.0)) ==
        doctest::Approx(7.0).epsilon(1e-12));
  // s = 0.5, zero gap and pdi closure.
  CHECK(tgb::h1_terminal(tgb::RunStatus::kTimeLimit, 2.0, rs, base(1.0)) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tgb::h1_terminal(tgb::RunStatus::kInfeasible, 50.0, rs, base(50.0)) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tgb::h1_terminal(tgb::RunStatus::kUnbounded, 50.0, rs, base(50.0)) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pace-shaped step reward component zeros") {
  tgb::RewardState rs;
  rs.t = 1;
  rs.n_t = 50.0;
  rs.tau = 1.0;
  rs.gap_prev = rs.gap_t = 0.5;
  rs.pdi_prev = rs.pdi_t = 1.0;
  // n_t = B kills the efficiency term; equal gaps and PDIs kill the rest.
  // Remaining pace term: tanh(1.5 * (50 - 50) / 51) = 0.
  CHECK(tgb::h2_step(rs, base(50.0)) == doctest::Approx(0.0).epsilon(1e-12));

  tgb::RewardState start;
  start.t = 0;
  start.n_t = 0.0;
  start.tau = 0.0;
  start.gap_prev = 0.2;
  start.gap_t = 0.9;  // t = 0 forces the gap delta to zero anyway
  start.pdi_prev = start.pdi_t = 0.0;
  // e = tanh(1.5), p = 0, g = 0, d = 0.
  CHECK(tgb::h2_step(start, base(50.0)) ==
        doctest::Approx(0.5 * std::tanh(1.5)).epsilon(1e-12));
}

TEST_CASE("pace-shaped terminal table") {
  tgb::RewardState rs;
  rs.gap_t = 1.0;
  rs.pdi_t = 1.0;
  CHECK(tgb::h2_terminal(tgb::RunStatus::kOptimal, 50.0, rs, base(50.0)) ==
        doctest::Approx(3.5).epsilon(1e-12));
  CHECK(tgb::h2_terminal(tgb::RunStatus::kInfeasible, 50.0, rs, base(50.0)) ==
        doctest::Approx(2.7).epsilon(1e-12));
  CHECK(tgb::h2_terminal(tgb::RunStatus::kTimeLimit, 2.0, rs, base(1.0)) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("difficulty-adaptive weights") {
  tgb::H3Weights w = tgb::h3_weights(1.0);
  CHECK(w.difficulty == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w.nodes == doctest::Approx(0.40).epsilon(1e-12));
  CHECK(w.gap == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(w.pdi == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(w.pace == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(w.prog == 0.15);

  // Blend identity: the four adaptive weights always sum to 0.85.
  std::mt19937_64 rng(7);
  double prev_d = 0.0;
  for (double b : {1.0, 3.0, 10.0, 100.0, 5000.0, 1e6, 1e9}) {
    tgb::H3Weights v = tgb::h3_weights(b);
    CHECK(v.nodes + v.gap + v.pdi + v.pace == doctest::Approx(0.85).epsilon(1e-15));
    CHECK(v.difficulty > prev_d);  // monotone in B
    CHECK(v.difficulty > 0.0);
    CHECK(v.difficulty < 1.0);
    prev_d = v.difficulty;
  }
  for (int i = 0; i < 100; ++i) {
    tgb::H3Weights v = tgb::h3_weights(1.0 + 1e7 * u01(rng));
    CHECK(v.nodes + v.gap + v.pdi + v.pace == doctest::Approx(0.85).epsilon(1e-15));
  }
}

TEST_CASE("difficulty-adaptive terminal table") {
  tgb::RewardState rs;
  rs.gap_t = 1.0;
  rs.pdi_t = 1.0;
  CHECK(tgb::h3_terminal(tgb::RunStatus::kOptimal, 50.0, rs, base(50.0)) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(tgb::h3_terminal(tgb::RunStatus::kOptimal, 5.0, rs, base(50.0)) ==
        doctest::Approx(10.0).epsilon(1e-12));
  CHECK(tgb::h3_terminal(tgb::RunStatus::kUnbounded, 50.0, rs, base(50.0)) ==
        doctest::Approx(2.8).epsilon(1e-12));
  CHECK(tgb::h3_terminal(tgb::RunStatus::kTimeLimit, 2.0, rs, base(1.0)) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("difficulty-adaptive step with a closed gap") {
  tgb::RewardState rs;
  rs.t = 3;
  rs.n_t = 50.0;
  rs.tau = 0.5;
  rs.gap0 = 0.8;
  rs.gap_prev = 0.1;
  rs.gap_t = 0.0;
  rs.pdi_prev = rs.pdi_t = 1.0;
  rs.open_prev = rs.open_t = 4.0;
  tgb::BaselineStats bs = base(50.0);
  tgb::H3Weights w = tgb::h3_weights(bs.nodes);
  double sched = 50.0 * std::pow(0.5, 0.7);
  double expect = w.pace * std::tanh(1.5 * (sched - 50.0) / (sched + 1.0));
  CHECK(tgb::h3_step(rs, bs, w) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::fabs(tgb::h3_step(rs, bs, w)) <= 1.0);
}

TEST_CASE("step rewards stay in bounds over random states") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100000; ++trial) {
    tgb::RewardState rs;
    rs.t = static_cast<std::int64_t>(rng() % 50);
    rs.n_t = 1e7 * u01(rng);
    rs.dn_t = 1e5 * u01(rng);
    rs.gap0 = (trial % 7 == 0) ? 0.0 : u01(rng);
    rs.gap_prev = u01(rng);
    rs.gap_t = u01(rng);
    rs.pdi_prev = 100.0 * u01(rng);
    rs.pdi_t = 100.0 * u01(rng);
    rs.tau = u01(rng);
    rs.open_prev = std::floor(1e4 * u01(rng));
    rs.open_t = std::floor(1e4 * u01(rng));
    tgb::BaselineStats bs = base(1.0 + 1e7 * u01(rng), u01(rng),
                                 (trial % 5 == 0) ? 0.0 : 100.0 * u01(rng));
    double h1 = tgb::h1_step(rs, bs);
    double h2 = tgb::h2_step(rs, bs);
    double h3 = tgb::h3_step(rs, bs, tgb::h3_weights(bs.nodes));
    REQUIRE(std::isfinite(h1));
    REQUIRE(std::isfinite(h2));
    REQUIRE(std::isfinite(h3));
    REQUIRE(h1 <= 0.0);
    REQUIRE(h1 >= -1.0);
    REQUIRE(std::fabs(h2) <= 1.0);
    REQUIRE(std::fabs(h3) <= 1.0);
    // Terminals are unclipped but bounded via s <= 3.
    for (auto st : {tgb::RunStatus::kOptimal, tgb::RunStatus::kTimeLimit,
                    tgb::RunStatus::kInfeasible, tgb::RunStatus::kUnbounded}) {
      double n_term = std::max(1.0, rs.n_t);
      REQUIRE(std::isfinite(tgb::h1_terminal(st, n_term, rs, bs)));
      REQUIRE(std::isfinite(tgb::h2_terminal(st, n_term, rs, bs)));
      REQUIRE(std::isfinite(tgb::h3_terminal(st, n_term, rs, bs)));
    }
  }
}

TEST_CASE("terminal bonus ranges for solved runs") {
  std::mt19937_64 rng(13);
  tgb::RewardState rs;
  for (int trial = 0; trial < 1000; ++trial) {
    double b = 1.0 + 1e6 * u01(rng);
    double n = 1.0 + 1e6 * u01(rng);
    double h1 = tgb::h1_terminal(tgb::RunStatus::kOptimal, n, rs, base(b));
    double h2 = tgb::h2_terminal(tgb::RunStatus::kOptimal, n, rs, base(b));
    double h3 = tgb::h3_terminal(tgb::RunStatus::kOptimal, n, rs, base(b));
    REQUIRE(h1 > 1.0);
    REQUIRE(h1 <= 7.0);
    REQUIRE(h2 > 1.0);
    REQUIRE(h2 <= 8.5);
    REQUIRE(h3 > 1.0);
    REQUIRE(h3 <= 10.0);
  }
}

TEST_CASE("signal and status names round-trip") {
  for (auto s : {tgb::RewardSignal::kH1, tgb::RewardSignal::kH2,
                 tgb::RewardSignal::kH3})
    CHECK(tgb::parse_reward_signal(tgb::reward_signal_name(s)) == s);
  CHECK_THROWS_WITH_AS(tgb::parse_reward_signal("H4"), "UNKNOWN_REWARD(H4)",
                       tgb::Error);
  for (auto s : {tgb::RunStatus::kOptimal, tgb::RunStatus::kTimeLimit,
                 tgb::RunStatus::kInfeasible, tgb::RunStatus::kUnbounded})
    CHECK(tgb::parse_run_status(tgb::run_status_name(s)) == s);
  CHECK_THROWS_AS(tgb::parse_run_status("DONE"), tgb::Error);
}

TEST_CASE("dispatch matches the per-signal functions") {
  tgb::RewardState rs;
  rs.t = 2;
  rs.n_t = 10.0;
  rs.dn_t = 2.0;
  rs.tau = 0.3;
  tgb::BaselineStats bs = base(20.0);
  CHECK(tgb::step_reward(tgb::RewardSignal::kH1, rs, bs) == tgb::h1_step(rs, bs));
  CHECK(tgb::step_reward(tgb::RewardSignal::kH2, rs, bs) == tgb::h2_step(rs, bs));
  CHECK(tgb::step_reward(tgb::RewardSignal::kH3, rs, bs) ==
        tgb::h3_step(rs, bs, tgb::h3_weights(bs.nodes)));
  CHECK(tgb::terminal_reward(tgb::RewardSignal::kH2, tgb::RunStatus::kOptimal,
                             10.0, rs, bs) ==
        tgb::h2_terminal(tgb::RunStatus::kOptimal, 10.0, rs, bs));
}

TEST_CASE("baseline acquisition reproduces the hand trace") {
  tgb::ValidationResult vr = tgb::validate_instance(knapsack2());
  REQUIRE(vr.errors.empty());
  tgb::RunConfig cfg;
  cfg.cutoff = -4.0;
  cfg.decision_budget = 100;
  tgb::BaselineStats bs = tgb::acquire_baseline(*vr.normalized, 0, cfg);
  CHECK(bs.nodes == 5.0);
  CHECK(bs.status == tgb::RunStatus::kOptimal);
  CHECK(bs.gap0 == doctest::Approx(tgb::compute_gap(-4.0, -17.0 / 3.0)));
  CHECK(bs.pdi0 > 0.0);
  CHECK(bs.instance == "knap2");
}

TEST_CASE("baseline manifest caches by instance and seed") {
  std::string path = "rewards_manifest_test.csv";
  std::remove(path.c_str());
  tgb::ValidationResult vr = tgb::validate_instance(knapsack2());
  REQUIRE(vr.errors.empty());
  tgb::RunConfig cfg;
  cfg.cutoff = -4.0;
  cfg.decision_budget = 100;
  tgb::BaselineStats first = tgb::acquire_baseline(*vr.normalized, 3, cfg, path);
  CHECK(first.nodes == 5.0);

  // Poison the cached row; a cache hit must return it verbatim, proving no
  // re-solve happened.
  std::vector<tgb::BaselineStats> rows = tgb::read_baseline_manifest(path);
  REQUIRE(rows.size() == 1);
  rows[0].nodes = 99.0;
  tgb::write_baseline_manifest(path, rows);
  tgb::BaselineStats again = tgb::acquire_baseline(*vr.normalized, 3, cfg, path);
  CHECK(again.nodes == 99.0);

  // A different seed misses the cache and appends.
  tgb::BaselineStats other = tgb::acquire_baseline(*vr.normalized, 4, cfg, path);
  CHECK(other.nodes == 5.0);
  CHECK(tgb::read_baseline_manifest(path).size() == 2);
  std::remove(path.c_str());
}

TEST_CASE("manifest io round-trips exactly") {
  std::string path = "rewards_manifest_rt.csv";
  std::vector<tgb::BaselineStats> rows;
  tgb::BaselineStats a;
  a.instance = "inst_a";
  a.seed = 17;
  a.nodes = 123.0;
  a.gap0 = 1.0 / 3.0;
  a.pdi0 = 0.12345678901234567;
  a.status = tgb::RunStatus::kTimeLimit;
  rows.push_back(a);
  tgb::write_baseline_manifest(path, rows);
  std::vector<tgb::BaselineStats> back = tgb::read_baseline_manifest(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].instance == "inst_a");
  CHECK(back[0].seed == 17);
  CHECK(back[0].nodes == 123.0);
  CHECK(back[0].gap0 == a.gap0);
  CHECK(back[0].pdi0 == a.pdi0);
  CHECK(back[0].status == tgb::RunStatus::kTimeLimit);
  std::remove(path.c_str());
}
