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

#include "tgbranch/tune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tgb {
namespace {

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

template <typename T>
T pick(std::mt19937_64& rng, const std::vector<T>& set) {
  return set[rng() % set.size()];
}

const std::vector<int> kHiddenSizes = {64, 128, 256, 384};
const std::vector<int> kLayerCounts = {2, 3, 4, 5, 6};
const std::vector<int> kHeadCounts = {2, 4, 8};
const std::vector<int> kMinibatchSizes = {32, 64, 128, 256, 512};
const std::vector<int> kEpochCounts = {1, 2, 3, 4, 5, 6};

}  // namespace

SampledConfig sample_config(std::mt19937_64& rng) {
  SampledConfig cfg;
  cfg.net.d_h = pick(rng, kHiddenSizes);
  cfg.net.n_layers = pick(rng, kLayerCounts);
  cfg.net.n_heads = pick(rng, kHeadCounts);
  cfg.net.dropout = uniform(rng, 0.0, 0.3);
  cfg.net.seed = rng();
  cfg.train.actor_lr = log_uniform(rng, 1e-6, 3e-4);
  cfg.train.critic_lr = log_uniform(rng, 1e-6, 3e-4);
  cfg.train.clip_eps = uniform(rng, 0.05, 0.3);
  cfg.train.entropy_coef = log_uniform(rng, 1e-5, 1e-2);
  cfg.train.gamma = uniform(rng, 0.92, 0.999);
  cfg.train.gae_lambda = uniform(rng, 0.8, 0.99);
  cfg.train.minibatch = pick(rng, kMinibatchSizes);
  cfg.train.epochs = pick(rng, kEpochCounts);
  cfg.train.reward_signal =
      pick(rng, std::vector<RewardSignal>{RewardSignal::kH1, RewardSignal::kH2,
                                          RewardSignal::kH3});
  cfg.train.horizon = 512;
  cfg.train.seed = rng();
  return cfg;
}

bool in_search_space(const SampledConfig& cfg) {
  auto member = [](int v, const std::vector<int>& set) {
    return std::find(set.begin(), set.end(), v) != set.end();
  };
  return member(cfg.net.d_h, kHiddenSizes) &&
         member(cfg.net.n_layers, kLayerCounts) &&
         member(cfg.net.n_heads, kHeadCounts) && cfg.net.dropout >= 0.0 &&
         cfg.net.dropout <= 0.3 && cfg.train.actor_lr >= 1e-6 &&
         cfg.train.actor_lr <= 3e-4 && cfg.train.critic_lr >= 1e-6 &&
         cfg.train.critic_lr <= 3e-4 && cfg.train.clip_eps >= 0.05 &&
         cfg.train.clip_eps <= 0.3 && cfg.train.entropy_coef >= 1e-5 &&
         cfg.train.entropy_coef <= 1e-2 && cfg.train.gamma >= 0.92 &&
         cfg.train.gamma <= 0.999 && cfg.train.gae_lambda >= 0.8 &&
         cfg.train.gae_lambda <= 0.99 &&
         member(cfg.train.minibatch, kMinibatchSizes) &&
         member(cfg.train.epochs, kEpochCounts);
}

std::vector<int> stratified_folds(const std::vector<double>& difficulty,
                                  int k, std::mt19937_64& rng) {
  if (k < 1) throw Error("BAD_CONFIG", "folds");
  std::size_t n = difficulty.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return difficulty[a] < difficulty[b];
  });

  // Quartile bins by rank, then a shuffled round-robin deal per bin with a
  // carried offset so fold sizes stay balanced overall.
  std::vector<int> fold(n, 0);
  std::size_t dealt = 0;
  for (int bin = 0; bin < 4; ++bin) {
    std::size_t lo = bin * n / 4, hi = (bin + 1) * n / 4;
    std::vector<int> members(order.begin() + lo, order.begin() + hi);
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[members[i]] = static_cast<int>((dealt + i) % k);
    dealt += members.size();
  }
  return fold;
}

void MedianPruner::complete_trial(const std::vector<double>& scores) {
  if (per_step_.size() < scores.size()) per_step_.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    per_step_[i].push_back(scores[i]);
}

std::optional<double> MedianPruner::median_at(std::size_t step) const {
  if (step >= per_step_.size() || per_step_[step].empty()) return std::nullopt;
  std::vector<double> v = per_step_[step];
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool MedianPruner::should_prune(const std::vector<double>& running) const {
  int streak = 0;
  for (std::size_t i = running.size(); i-- > 0;) {
    std::optional<double> med = median_at(i);
    if (!med || running[i] <= *med) break;
    ++streak;
  }
  return streak >= 3;
}

namespace {

// Trains briefly on `train_items` and scores the greedy policy on
// `val_items`.
double score_split(const SampledConfig& sc,
                   const std::vector<TuneItem>& train_items,
                   const std::vector<TuneItem>& val_items,
                   const RunConfig& run_cfg, int episodes) {
  TrainConfig tcfg = sc.train;
  tcfg.episodes = episodes;
  tcfg.seeds = 1;
  std::vector<TrainTask> tasks;
  for (const TuneItem& it : train_items)
    tasks.push_back({it.instance, it.cutoff});
  TrainResult trained = train(tasks, sc.net, tcfg, run_cfg);

  TgNet net(sc.net);
  std::vector<double> node_values, pdi_values;
  for (const TuneItem& it : val_items) {
    RunConfig cfg = run_cfg;
    cfg.cutoff = it.cutoff ? it.cutoff : run_cfg.cutoff;
    cfg.seed = it.seed;
    NetRolloutPolicy policy(net, trained.params, it.seed, /*greedy=*/true);
    RunStats stats = run_bnb(it.instance, policy, cfg);
    if (stats.status == RunStatus::kOptimal)
      node_values.push_back(static_cast<double>(stats.nodes_explored));
    pdi_values.push_back(stats.pdi);
  }
  return composite_score(node_values, pdi_values);
}

std::vector<TuneItem> select_items(const std::vector<TuneItem>& items,
                                   const std::vector<int>& fold, int which,
                                   bool invert) {
  std::vector<TuneItem> out;
  for (std::size_t i = 0; i < items.size(); ++i)
    if ((fold[i] == which) != invert) out.push_back(items[i]);
  return out;
}

}  // namespace

TuneResult nested_cv_tune(const std::vector<TuneItem>& items,
                          const TuneConfig& cfg, const RunConfig& run_cfg) {
  std::size_t need =
      static_cast<std::size_t>(cfg.outer_folds) * cfg.inner_folds;
  if (items.size() < need)
    throw Error("INSUFFICIENT_DATA", std::to_string(items.size()));
  std::mt19937_64 rng(cfg.seed);

  std::vector<double> difficulty;
  for (const TuneItem& it : items) difficulty.push_back(it.baseline_nodes);
  std::vector<int> outer = stratified_folds(difficulty, cfg.outer_folds, rng);

  MedianPruner pruner;
  TuneResult result;
  double best_score = kInf;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    TrialRecord rec;
    rec.id = trial;
    rec.config = sample_config(rng);

    std::vector<double> outer_scores;
    for (int o = 0; o < cfg.outer_folds && !rec.pruned; ++o) {
      std::vector<TuneItem> pool = select_items(items, outer, o, true);
      std::vector<double> pool_diff;
      for (const TuneItem& it : pool) pool_diff.push_back(it.baseline_nodes);
      std::vector<int> inner =
          stratified_folds(pool_diff, cfg.inner_folds, rng);

      double fold_sum = 0.0;
      int fold_count = 0;
      for (int i = 0; i < cfg.inner_folds; ++i) {
        std::vector<TuneItem> inner_train = select_items(pool, inner, i, true);
        std::vector<TuneItem> inner_val = select_items(pool, inner, i, false);
        if (inner_train.empty() || inner_val.empty())
          throw Error("INSUFFICIENT_DATA", "inner fold");
        double s = score_split(rec.config, inner_train, inner_val, run_cfg,
                               cfg.episodes_per_trial);
        rec.inner_scores.push_back(s);
        fold_sum += s;
        ++fold_count;
        if (pruner.should_prune(rec.inner_scores)) {
          rec.pruned = true;
          break;
        }
      }
      if (!rec.pruned && fold_count > 0)
        outer_scores.push_back(fold_sum / fold_count);
    }

    if (!rec.pruned) {
      rec.mean_score =
          std::accumulate(outer_scores.begin(), outer_scores.end(), 0.0) /
          outer_scores.size();
      pruner.complete_trial(rec.inner_scores);
      if (rec.mean_score < best_score) {
        best_score = rec.mean_score;
        result.best = rec.config;
      }
    }
    result.trials.push_back(std::move(rec));
  }
  if (best_score == kInf && !result.trials.empty())
    result.best = result.trials.front().config;
  return result;
}

std::string config_to_text(const SampledConfig& cfg) {
  std::ostringstream os;
  os << "d_h = " << cfg.net.d_h << '\n';
  os << "n_layers = " << cfg.net.n_layers << '\n';
  os << "n_heads = " << cfg.net.n_heads << '\n';
  os << "dropout = " << format_real(cfg.net.dropout) << '\n';
  os << "gate_depth = " << cfg.net.gate_depth << '\n';
  os << "net_seed = " << cfg.net.seed << '\n';
  os << "actor_lr = " << format_real(cfg.train.actor_lr) << '\n';
  os << "critic_lr = " << format_real(cfg.train.critic_lr) << '\n';
  os << "clip_eps = " << format_real(cfg.train.clip_eps) << '\n';
  os << "entropy_coef = " << format_real(cfg.train.entropy_coef) << '\n';
  os << "value_coef = " << format_real(cfg.train.value_coef) << '\n';
  os << "gamma = " << format_real(cfg.train.gamma) << '\n';
  os << "gae_lambda = " << format_real(cfg.train.gae_lambda) << '\n';
  os << "minibatch = " << cfg.train.minibatch << '\n';
  os << "epochs = " << cfg.train.epochs << '\n';
  os << "horizon = " << cfg.train.horizon << '\n';
  os << "grad_clip_norm = " << format_real(cfg.train.grad_clip_norm) << '\n';
  os << "weight_decay = " << format_real(cfg.train.weight_decay) << '\n';
  os << "episodes = " << cfg.train.episodes << '\n';
  os << "reward_signal = " << reward_signal_name(cfg.train.reward_signal)
     << '\n';
  os << "seeds = " << cfg.train.seeds << '\n';
  os << "train_seed = " << cfg.train.seed << '\n';
  return os.str();
}

SampledConfig config_from_text(const std::string& text) {
  static const std::vector<std::string> keys = {
      "d_h",        "n_layers",   "n_heads",      "dropout",
      "gate_depth", "net_seed",   "actor_lr",     "critic_lr",
      "clip_eps",   "entropy_coef", "value_coef", "gamma",
      "gae_lambda", "minibatch",  "epochs",       "horizon",
      "grad_clip_norm", "weight_decay", "episodes", "reward_signal",
      "seeds",      "train_seed"};
  SampledConfig cfg;
  for (const auto& [key, value] : parse_config_file(text, keys)) {
    if (key == "d_h") cfg.net.d_h = std::stoi(value);
    else if (key == "n_layers") cfg.net.n_layers = std::stoi(value);
    else if (key == "n_heads") cfg.net.n_heads = std::stoi(value);
    else if (key == "dropout") cfg.net.dropout = parse_real(value);
    else if (key == "gate_depth") cfg.net.gate_depth = std::stoi(value);
    else if (key == "net_seed") cfg.net.seed = std::stoull(value);
    else if (key == "actor_lr") cfg.train.actor_lr = parse_real(value);
    else if (key == "critic_lr") cfg.train.critic_lr = parse_real(value);
    else if (key == "clip_eps") cfg.train.clip_eps = parse_real(value);
    else if (key == "entropy_coef") cfg.train.entropy_coef = parse_real(value);
    else if (key == "value_coef") cfg.train.value_coef = parse_real(value);
    else if (key == "gamma") cfg.train.gamma = parse_real(value);
    else if (key == "gae_lambda") cfg.train.gae_lambda = parse_real(value);
    else if (key == "minibatch") cfg.train.minibatch = std::stoi(value);
    else if (key == "epochs") cfg.train.epochs = std::stoi(value);
    else if (key == "horizon") cfg.train.horizon = std::stoi(value);
    else if (key == "grad_clip_norm")
      cfg.train.grad_clip_norm = parse_real(value);
    else if (key == "weight_decay") cfg.train.weight_decay = parse_real(value);
    else if (key == "episodes") cfg.train.episodes = std::stoi(value);
    else if (key == "reward_signal")
      cfg.train.reward_signal = parse_reward_signal(value);
    else if (key == "seeds") cfg.train.seeds = std::stoi(value);
    else if (key == "train_seed") cfg.train.seed = std::stoull(value);
  }
  return cfg;
}

}  // namespace tgb
