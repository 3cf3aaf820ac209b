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
#include <random>

#include "doctest.h"
#include "tgbranch/ppo.hpp"

namespace {

tgb::NetConfig tiny_net() {
  tgb::NetConfig cfg;
  cfg.d_h = 8;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.gate_depth = 2;
  cfg.dropout = 0.0;
  cfg.seed = 5;
  return cfg;
}

tgb::TrainConfig tiny_train() {
  tgb::TrainConfig cfg;
  cfg.minibatch = 16;
  cfg.epochs = 1;
  cfg.horizon = 64;
  cfg.seed = 9;
  return cfg;
}

tgb::StateFeatures bandit_state(int num_candidates) {
  std::mt19937_64 rng(42);
  tgb::StateFeatures s;
  s.candidates = Eigen::MatrixXd(num_candidates, tgb::kCandidateFeatureDim);
  for (Eigen::Index i = 0; i < s.candidates.size(); ++i)
    s.candidates.data()[i] =
        2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  s.node = Eigen::VectorXd::Constant(tgb::kNodeFeatureDim, 0.25);
  s.tree = Eigen::VectorXd::Constant(tgb::kTreeFeatureDim, -0.25);
  s.pad_mask.assign(num_candidates, false);
  for (int i = 0; i < num_candidates; ++i) s.candidate_var_ids.push_back(i);
  return s;
}

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

tgb::MilpInstance normalized_knap2() {
  tgb::ValidationResult vr = tgb::validate_instance(knapsack2());
  REQUIRE(vr.errors.empty());
  return *vr.normalized;
}

// Rolls one episode and returns (transitions, stats).
std::pair<std::vector<tgb::Transition>, tgb::RunStats> roll_episode(
    const tgb::TgNet& net, const tgb::ParamMap& params,
    const tgb::MilpInstance& inst, std::uint64_t seed) {
  tgb::RunConfig cfg;
  cfg.cutoff = -4.0;
  cfg.decision_budget = 64;
  cfg.seed = seed;
  tgb::BaselineStats bs = tgb::acquire_baseline(inst, seed, cfg);
  tgb::NetRolloutPolicy policy(net, params, seed);
  std::vector<tgb::DecisionEvent> traj;
  tgb::RunStats stats = tgb::run_bnb(inst, policy, cfg, &traj);
  return {tgb::make_transitions(traj, policy.steps(), stats, bs,
                                tgb::RewardSignal::kH3),
          stats};
}

}  // namespace

TEST_CASE("advantage recursion oracles") {
  tgb::Transition a;
  a.reward = 1.0;
  a.value_old = 0.0;
  a.terminal = true;
  auto [adv1, ret1] = tgb::compute_gae({a}, 0.0, 0.99, 0.95);
  CHECK(adv1[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ret1[0] == doctest::Approx(1.0).epsilon(1e-15));

  tgb::Transition t0, t1;
  t0.reward = 1.0;
  t1.reward = 1.0;
  t1.terminal = true;
  auto [adv2, ret2] = tgb::compute_gae({t0, t1}, 0.0, 0.5, 0.5);
  CHECK(adv2[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(adv2[0] == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(ret2[0] == doctest::Approx(1.25).epsilon(1e-15));

  tgb::Transition z;
  z.terminal = true;
  std::vector<tgb::Transition> zeros = {tgb::Transition{}, tgb::Transition{}, z};
  auto [adv3, ret3] = tgb::compute_gae(zeros, 0.0, 0.9, 0.8);
  for (double v : adv3) CHECK(v == 0.0);
  CHECK_THROWS_AS(tgb::compute_gae({}, 0.0, 0.9, 0.8), tgb::Error);
}

TEST_CASE("gae with lambda = gamma = 1 equals monte-carlo advantage") {
  std::mt19937_64 rng(3);
  auto u = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<tgb::Transition> buf(1 + rng() % 20);
    for (auto& tr : buf) {
      tr.reward = 2.0 * u() - 1.0;
      tr.value_old = 2.0 * u() - 1.0;
    }
    buf.back().terminal = true;
    auto [adv, ret] = tgb::compute_gae(buf, 0.0, 1.0, 1.0);
    double tail = 0.0;
    for (std::size_t i = buf.size(); i-- > 0;) {
      tail += buf[i].reward;
      CHECK(adv[i] == doctest::Approx(tail - buf[i].value_old).epsilon(1e-12));
      CHECK(ret[i] == doctest::Approx(tail).epsilon(1e-12));
    }
  }
}

TEST_CASE("advantage standardization invariant") {
  std::mt19937_64 rng(4);
  std::vector<double> v(64);
  for (double& x : v)
    x = 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 3.0;
  tgb::standardize(v);
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  for (double x : v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / v.size());
  CHECK(std::fabs(mean) < 1e-9);
  CHECK(sd > 1.0 - 1e-6);
  CHECK(sd < 1.0 + 1e-6);

  std::vector<double> one = {5.0};
  tgb::standardize(one);
  CHECK(one[0] == 5.0);  // no-op below two samples
}

TEST_CASE("clipped surrogate arithmetic") {
  // min(r*A, clip(r)*A) with eps = 0.2.
  auto surr = [](double r, double a, double eps) {
    return std::min(r * a, std::clamp(r, 1.0 - eps, 1.0 + eps) * a);
  };
  CHECK(surr(2.0, 1.0, 0.2) == doctest::Approx(1.2));
  CHECK(surr(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
  CHECK(surr(1.0, 3.0, 0.2) == doctest::Approx(3.0));
}

TEST_CASE("first-epoch ratios are one without dropout") {
  tgb::MilpInstance inst = normalized_knap2();
  tgb::TrainConfig tcfg = tiny_train();
  tcfg.epochs = 1;
  tgb::PpoTrainer trainer(tiny_net(), tcfg);
  auto [buffer, stats] = roll_episode(trainer.net(), trainer.params(), inst, 1);
  REQUIRE(!buffer.empty());
  tgb::UpdateStats st = trainer.update(buffer);
  CHECK(std::fabs(st.mean_ratio - 1.0) < 1e-9);
  CHECK(st.clip_frac == 0.0);
  CHECK(buffer.empty());  // cleared per the update contract
}

TEST_CASE("zero learning rates leave parameters bit-exact") {
  tgb::MilpInstance inst = normalized_knap2();
  tgb::TrainConfig tcfg = tiny_train();
  tcfg.actor_lr = 0.0;
  tcfg.critic_lr = 0.0;
  tcfg.epochs = 2;
  tgb::PpoTrainer trainer(tiny_net(), tcfg);
  tgb::ParamMap before = trainer.params();
  auto [buffer, stats] = roll_episode(trainer.net(), trainer.params(), inst, 2);
  REQUIRE(!buffer.empty());
  trainer.update(buffer);
  for (const auto& [name, w] : trainer.params()) CHECK(w == before.at(name));
}

TEST_CASE("invalid training configurations are rejected") {
  tgb::TrainConfig cfg = tiny_train();
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), tgb::Error);
  cfg = tiny_train();
  cfg.minibatch = cfg.horizon + 1;
  CHECK_THROWS_AS(cfg.validate(), tgb::Error);
  cfg = tiny_train();
  cfg.clip_eps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), tgb::Error);
}

TEST_CASE("bandit policy converges on the rewarding action") {
  tgb::StateFeatures state = bandit_state(2);
  tgb::TrainConfig tcfg = tiny_train();
  tcfg.actor_lr = 0.01;
  tcfg.critic_lr = 0.01;
  tcfg.entropy_coef = 1e-3;
  tcfg.weight_decay = 0.0;
  tgb::PpoTrainer trainer(tiny_net(), tcfg);
  std::mt19937_64 rng(17);

  double p0 = 0.0;
  int updates = 0;
  for (; updates < 200; ++updates) {
    std::vector<tgb::Transition> buffer;
    for (int i = 0; i < 16; ++i) {
      tgb::PolicyOutput out =
          trainer.net().forward(state, trainer.params());
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      int action = u < out.probs(0) ? 0 : 1;
      tgb::Transition tr;
      tr.state = state;
      tr.action = action;
      auto [lp, ent] = tgb::log_prob_entropy(out, action);
      (void)ent;
      tr.log_prob_old = lp;
      tr.value_old = out.value;
      tr.reward = action == 0 ? 1.0 : -1.0;
      tr.terminal = true;
      buffer.push_back(std::move(tr));
    }
    trainer.update(buffer);
    p0 = trainer.net().forward(state, trainer.params()).probs(0);
    if (p0 >= 0.9) break;
  }
  INFO("updates used: ", updates, " final p0: ", p0);
  CHECK(p0 >= 0.9);
}

TEST_CASE("terminal reward lands on the final transition") {
  tgb::MilpInstance inst = normalized_knap2();
  tgb::PpoTrainer trainer(tiny_net(), tiny_train());
  auto [buffer, stats] = roll_episode(trainer.net(), trainer.params(), inst, 5);
  REQUIRE(!buffer.empty());
  for (std::size_t i = 0; i + 1 < buffer.size(); ++i) {
    CHECK(!buffer[i].terminal);
    CHECK(std::fabs(buffer[i].reward) <= 1.0);  // clipped step reward
  }
  CHECK(buffer.back().terminal);
  CHECK(stats.status == tgb::RunStatus::kOptimal);
  // Optimal terminal bonus exceeds the step-reward band.
  CHECK(buffer.back().reward > 0.0);
  for (const tgb::Transition& tr : buffer) {
    CHECK(tr.log_prob_old <= 0.0);
    CHECK(std::isfinite(tr.reward));
  }
}

TEST_CASE("trajectory and step list must agree") {
  std::vector<tgb::DecisionEvent> traj(2);
  std::vector<tgb::NetRolloutPolicy::Step> steps(1);
  tgb::RunStats stats;
  tgb::BaselineStats bs;
  CHECK_THROWS_AS(
      tgb::make_transitions(traj, steps, stats, bs, tgb::RewardSignal::kH1),
      tgb::Error);
}

TEST_CASE("zero-episode training returns an initialized checkpoint") {
  tgb::TrainConfig tcfg = tiny_train();
  tcfg.episodes = 0;
  std::vector<tgb::TrainTask> tasks = {{normalized_knap2(), -4.0}};
  tgb::TrainResult res = tgb::train(tasks, tiny_net(), tcfg, tgb::RunConfig{});
  CHECK(res.log.empty());
  CHECK(res.params.size() == tgb::init_params(tiny_net()).size());
  CHECK(tgb::training_log_csv(res.log) ==
        "episode,instance,seed,nodes,pdi,status,sum_reward,policy_loss,"
        "value_loss,entropy,clip_frac\n");
}

TEST_CASE("training replays deterministically") {
  tgb::TrainConfig tcfg = tiny_train();
  tcfg.episodes = 4;
  tcfg.seeds = 2;
  std::vector<tgb::TrainTask> tasks = {{normalized_knap2(), -4.0}};
  tgb::RunConfig rcfg;
  rcfg.decision_budget = 64;
  tgb::TrainResult a = tgb::train(tasks, tiny_net(), tcfg, rcfg);
  tgb::TrainResult b = tgb::train(tasks, tiny_net(), tcfg, rcfg);
  REQUIRE(a.log.size() == 4);
  CHECK(tgb::training_log_csv(a.log) == tgb::training_log_csv(b.log));
  for (const auto& [name, w] : a.params) CHECK(w == b.params.at(name));
  for (const tgb::EpisodeLog& e : a.log) {
    CHECK(e.nodes >= 1);
    CHECK(std::isfinite(e.sum_reward));
  }
}
