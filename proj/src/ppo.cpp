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

#include "tgbranch/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tgb {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("BAD_CONFIG", "gamma");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw Error("BAD_CONFIG", "gae_lambda");
  if (!(clip_eps > 0.0)) throw Error("BAD_CONFIG", "clip_eps");
  if (minibatch < 1 || minibatch > horizon)
    throw Error("BAD_CONFIG", "minibatch");
  if (epochs < 1) throw Error("BAD_CONFIG", "epochs");
  if (horizon < 1) throw Error("BAD_CONFIG", "horizon");
  if (episodes < 0) throw Error("BAD_CONFIG", "episodes");
  if (seeds < 1) throw Error("BAD_CONFIG", "seeds");
}

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<Transition>& buffer, double bootstrap_value,
    double gamma, double lambda) {
  if (buffer.empty()) throw Error("EMPTY_BUFFER");
  std::size_t n = buffer.size();
  std::vector<double> adv(n), ret(n);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& tr = buffer[i];
    double live = tr.terminal ? 0.0 : 1.0;
    double delta = tr.reward + gamma * next_value * live - tr.value_old;
    next_adv = delta + gamma * lambda * live * next_adv;
    adv[i] = next_adv;
    ret[i] = next_adv + tr.value_old;
    next_value = tr.value_old;
  }
  return {std::move(adv), std::move(ret)};
}

void standardize(std::vector<double>& v) {
  if (v.size() < 2) return;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / v.size()) + 1e-8;
  for (double& x : v) x = (x - mean) / sd;
}

PpoTrainer::PpoTrainer(const NetConfig& net_cfg, const TrainConfig& cfg)
    : PpoTrainer(net_cfg, cfg, init_params(net_cfg)) {}

PpoTrainer::PpoTrainer(const NetConfig& net_cfg, const TrainConfig& cfg,
                       ParamMap params)
    : net_(net_cfg), cfg_(cfg), params_(std::move(params)), rng_(cfg.seed) {
  cfg_.validate();
  for (const auto& [name, w] : params_) {
    m_[name] = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    v_[name] = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  }
}

UpdateStats PpoTrainer::minibatch_step(const std::vector<Transition>& buffer,
                                       const std::vector<int>& index,
                                       const std::vector<double>& advantages,
                                       const std::vector<double>& returns) {
  ad::Tape tape;
  std::map<std::string, int> ids = TgNet::insert_params(tape, params_);
  int n = static_cast<int>(index.size());
  double lo = 1.0 - cfg_.clip_eps, hi = 1.0 + cfg_.clip_eps;

  int surr_sum = -1, vloss_sum = -1, ent_sum = -1;
  double ratio_sum = 0.0;
  int clipped = 0;
  for (int k : index) {
    const Transition& tr = buffer[k];
    ForwardGraph g =
        net_.build_graph(tape, ids, tr.state, ForwardMode::kTrain, &rng_);
    int lp = tape.select(g.log_probs, 0, tr.action);
    int ratio = tape.exp_op(tape.add_scalar(lp, -tr.log_prob_old));
    double r = tape.value(ratio)(0, 0);
    ratio_sum += r;
    if (r < lo || r > hi) ++clipped;
    double a = advantages[k];
    int surr = tape.min_op(tape.scale(ratio, a),
                           tape.scale(tape.clamp(ratio, lo, hi), a));
    int verr = tape.add_scalar(g.value, -returns[k]);
    int vloss = tape.mul(verr, verr);
    surr_sum = surr_sum < 0 ? surr : tape.add(surr_sum, surr);
    vloss_sum = vloss_sum < 0 ? vloss : tape.add(vloss_sum, vloss);
    ent_sum = ent_sum < 0 ? g.entropy : tape.add(ent_sum, g.entropy);
  }
  int loss = tape.add(
      tape.add(tape.scale(surr_sum, -1.0 / n),
               tape.scale(vloss_sum, cfg_.value_coef / n)),
      tape.scale(ent_sum, -cfg_.entropy_coef / n));
  double loss_val = tape.value(loss)(0, 0);
  if (!std::isfinite(loss_val)) throw Error("NON_FINITE_LOSS");
  tape.backward(loss);

  std::map<std::string, Eigen::MatrixXd> grads;
  for (const auto& [name, id] : ids) grads[name] = tape.grad(id);
  apply(grads);

  UpdateStats st;
  st.policy_loss = -tape.value(surr_sum)(0, 0) / n;
  st.value_loss = tape.value(vloss_sum)(0, 0) / n;
  st.entropy = tape.value(ent_sum)(0, 0) / n;
  st.mean_ratio = ratio_sum / n;
  st.clip_frac = static_cast<double>(clipped) / n;
  st.minibatches = 1;
  return st;
}

void PpoTrainer::apply(const std::map<std::string, Eigen::MatrixXd>& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    if (!g.allFinite()) throw Error("NON_FINITE_GRAD", name);
    sq += g.squaredNorm();
  }
  double norm = std::sqrt(sq);
  double gscale =
      (cfg_.grad_clip_norm > 0.0 && norm > cfg_.grad_clip_norm)
          ? cfg_.grad_clip_norm / norm
          : 1.0;

  ++step_;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (auto& [name, w] : params_) {
    const Eigen::MatrixXd g = grads.at(name) * gscale;
    Eigen::MatrixXd& m = m_[name];
    Eigen::MatrixXd& v = v_[name];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    double lr = name.rfind("critic_", 0) == 0 ? cfg_.critic_lr : cfg_.actor_lr;
    if (lr == 0.0) continue;  // bit-exact no-op contract
    Eigen::MatrixXd mhat = m / bc1;
    Eigen::MatrixXd vhat = v / bc2;
    w -= lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    w -= lr * cfg_.weight_decay * w;  // decoupled decay
  }
}

UpdateStats PpoTrainer::update(std::vector<Transition>& buffer) {
  if (buffer.empty()) throw Error("EMPTY_BUFFER");
  auto [advantages, returns] = compute_gae(buffer, 0.0, cfg_.gamma,
                                           cfg_.gae_lambda);
  standardize(advantages);

  std::vector<int> order(buffer.size());
  std::iota(order.begin(), order.end(), 0);
  UpdateStats total;
  total.mean_ratio = 0.0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t start = 0; start < order.size();
         start += cfg_.minibatch) {
      std::size_t stop = std::min(order.size(),
                                  start + static_cast<std::size_t>(cfg_.minibatch));
      std::vector<int> index(order.begin() + start, order.begin() + stop);
      UpdateStats st = minibatch_step(buffer, index, advantages, returns);
      total.policy_loss += st.policy_loss;
      total.value_loss += st.value_loss;
      total.entropy += st.entropy;
      total.mean_ratio += st.mean_ratio;
      total.clip_frac += st.clip_frac;
      total.minibatches += 1;
    }
  }
  if (total.minibatches > 0) {
    total.policy_loss /= total.minibatches;
    total.value_loss /= total.minibatches;
    total.entropy /= total.minibatches;
    total.mean_ratio /= total.minibatches;
    total.clip_frac /= total.minibatches;
  }
  buffer.clear();
  return total;
}

// --- Rollout policy ---------------------------------------------------------

NetRolloutPolicy::NetRolloutPolicy(const TgNet& net, const ParamMap& params,
                                   std::uint64_t seed, bool greedy)
    : net_(net), params_(params), rng_(seed), greedy_(greedy) {}

int NetRolloutPolicy::decide(const StateFeatures& state, DecisionContext&) {
  PolicyOutput out = net_.forward(state, params_, ForwardMode::kRollout);
  int action = 0;
  if (greedy_) {
    double best = -kInf;
    for (int i = 0; i < out.probs.size(); ++i)
      if (!out.pad_mask[i] && out.probs(i) > best) {
        best = out.probs(i);
        action = i;
      }
  } else {
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    action = -1;
    for (int i = 0; i < out.probs.size(); ++i) {
      if (out.pad_mask[i]) continue;
      acc += out.probs(i);
      action = i;
      if (u < acc) break;
    }
  }
  auto [lp, ent] = log_prob_entropy(out, action);
  (void)ent;
  steps_.push_back({action, lp, out.value});
  return action;
}

// --- Episode assembly -------------------------------------------------------

std::vector<Transition> make_transitions(
    const std::vector<DecisionEvent>& traj,
    const std::vector<NetRolloutPolicy::Step>& steps, const RunStats& stats,
    const BaselineStats& baseline, RewardSignal signal) {
  if (traj.size() != steps.size()) throw Error("TRAJECTORY_MISMATCH");
  std::vector<Transition> out;
  out.reserve(traj.size());
  double gap0 = traj.empty() ? 1.0 : traj.front().gap_before;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const DecisionEvent& ev = traj[t];
    RewardState rs;
    rs.t = static_cast<std::int64_t>(t);
    rs.n_t = static_cast<double>(ev.nodes_after);
    rs.dn_t = static_cast<double>(ev.nodes_after - ev.nodes_before);
    rs.gap0 = gap0;
    rs.gap_prev = ev.gap_before;
    rs.gap_t = ev.gap_after;
    rs.pdi_prev = ev.pdi_before;
    rs.pdi_t = ev.pdi_after;
    rs.tau = ev.tau;
    rs.open_prev = static_cast<double>(ev.open_before);
    rs.open_t = static_cast<double>(ev.open_after);

    Transition tr;
    tr.state = ev.state;
    tr.action = ev.action;
    tr.log_prob_old = steps[t].log_prob;
    tr.value_old = steps[t].value;
    tr.reward = step_reward(signal, rs, baseline);
    if (t + 1 == traj.size()) {
      double n_term =
          static_cast<double>(std::max<std::int64_t>(1, stats.nodes_explored));
      tr.reward +=
          terminal_reward(signal, stats.status, n_term, rs, baseline);
      tr.terminal = true;
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
  std::ostringstream os;
  os << "episode,instance,seed,nodes,pdi,status,sum_reward,policy_loss,"
        "value_loss,entropy,clip_frac\n";
  for (const EpisodeLog& e : log) {
    os << e.episode << ',' << e.instance << ',' << e.seed << ',' << e.nodes
       << ',' << format_real(e.pdi) << ',' << run_status_name(e.status) << ','
       << format_real(e.sum_reward) << ',' << format_real(e.policy_loss)
       << ',' << format_real(e.value_loss) << ',' << format_real(e.entropy)
       << ',' << format_real(e.clip_frac) << '\n';
  }
  return os.str();
}

TrainResult train(const std::vector<TrainTask>& tasks,
                  const NetConfig& net_cfg, const TrainConfig& cfg,
                  const RunConfig& run_cfg,
                  const std::string& baseline_manifest,
                  const std::string& log_path,
                  const std::string& checkpoint_path) {
  cfg.validate();
  if (tasks.empty()) throw Error("EMPTY_TASKS");
  PpoTrainer trainer(net_cfg, cfg);
  std::mt19937_64 rng(cfg.seed);

  TrainResult result;
  result.net_cfg = net_cfg;
  int bad_streak = 0;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    std::size_t pick = rng() % (tasks.size() * cfg.seeds);
    const TrainTask& task = tasks[pick / cfg.seeds];
    std::uint64_t ep_seed = pick % cfg.seeds;

    RunConfig ep_cfg = run_cfg;
    ep_cfg.cutoff = task.cutoff ? task.cutoff : run_cfg.cutoff;
    ep_cfg.decision_budget =
        std::min<std::int64_t>(ep_cfg.decision_budget, cfg.horizon);
    ep_cfg.seed = ep_seed;
    BaselineStats baseline =
        acquire_baseline(task.instance, ep_seed, ep_cfg, baseline_manifest);
    ep_cfg.baseline_pdi = baseline.pdi0;

    NetRolloutPolicy policy(trainer.net(), trainer.params(),
                            cfg.seed * 7919 + episode);
    std::vector<DecisionEvent> traj;
    RunStats stats = run_bnb(task.instance, policy, ep_cfg, &traj);
    std::vector<Transition> buffer = make_transitions(
        traj, policy.steps(), stats, baseline, cfg.reward_signal);

    EpisodeLog e;
    e.episode = episode;
    e.instance = task.instance.name;
    e.seed = ep_seed;
    e.nodes = stats.nodes_explored;
    e.pdi = stats.pdi;
    e.status = stats.status;
    for (const Transition& tr : buffer) e.sum_reward += tr.reward;

    if (!buffer.empty()) {
      try {
        UpdateStats st = trainer.update(buffer);
        e.policy_loss = st.policy_loss;
        e.value_loss = st.value_loss;
        e.entropy = st.entropy;
        e.clip_frac = st.clip_frac;
        bad_streak = 0;
      } catch (const Error& err) {
        if (err.code() != "NON_FINITE_LOSS" && err.code() != "NON_FINITE_GRAD")
          throw;
        if (++bad_streak >= 3) throw;
        buffer.clear();
      }
    }
    result.log.push_back(std::move(e));

    if (!checkpoint_path.empty() && (episode + 1) % 50 == 0)
      save_checkpoint(checkpoint_path, net_cfg, trainer.params());
  }
  result.params = trainer.params();

  if (!log_path.empty()) {
    std::ofstream out(log_path, std::ios::trunc);
    if (!out) throw Error("IO_ERROR", log_path);
    out << training_log_csv(result.log);
  }
  if (!checkpoint_path.empty())
    save_checkpoint(checkpoint_path, net_cfg, result.params);
  return result;
}

}  // namespace tgb
