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

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tgbranch/evalx.hpp"
#include "tgbranch/ppo.hpp"
#include "tgbranch/tune.hpp"

namespace fs = std::filesystem;

namespace {

struct NamedInstance {
  fs::path path;
  tgb::MilpInstance raw;
  tgb::MilpInstance normalized;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw tgb::Error("IO_ERROR", path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw tgb::Error("IO_ERROR", path.string());
  out << text;
}

tgb::MilpInstance load_raw(const fs::path& path) {
  std::string text = read_file(path);
  if (path.extension() == ".mps") return tgb::parse_mps(text);
  return tgb::parse_instance(text);
}

NamedInstance load_instance(const fs::path& path) {
  NamedInstance ni;
  ni.path = path;
  ni.raw = load_raw(path);
  tgb::ValidationResult vr = tgb::validate_instance(ni.raw);
  if (!vr.normalized) {
    std::string joined;
    for (const std::string& e : vr.errors) joined += e + " ";
    throw tgb::Error("INVALID_INSTANCE", path.string() + ": " + joined);
  }
  ni.normalized = *vr.normalized;
  return ni;
}

std::vector<NamedInstance> load_dir(const std::string& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".milp" ||
        entry.path().extension() == ".mps")
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw tgb::Error("NO_INSTANCES", dir);
  std::vector<NamedInstance> out;
  for (const fs::path& p : paths) out.push_back(load_instance(p));
  return out;
}

// "A..B" or a single integer.
std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
  std::size_t dots = spec.find("..");
  if (dots == std::string::npos)
    return {static_cast<std::uint64_t>(std::stoull(spec))};
  std::uint64_t lo = std::stoull(spec.substr(0, dots));
  std::uint64_t hi = std::stoull(spec.substr(dots + 2));
  if (hi < lo) throw tgb::Error("BAD_SEED_RANGE", spec);
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

// Expert cutoff: the known optimum, resolved by brute force (long
// reliability run as fallback) and cached beside the instance.
std::optional<double> resolve_cutoff(const std::string& spec,
                                     const NamedInstance& ni,
                                     std::int64_t node_budget) {
  if (spec != "AUTO") return tgb::parse_real(spec);
  fs::path cache = ni.path;
  cache += ".cutoff";
  if (fs::exists(cache)) {
    std::string text = read_file(cache);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
      text.pop_back();
    if (text == "none") return std::nullopt;
    return tgb::parse_real(text);
  }
  std::optional<double> cutoff;
  tgb::BruteForceResult bf = tgb::brute_force_solve(ni.normalized);
  if (bf.status == tgb::BruteForceStatus::kOptimal) {
    cutoff = bf.objective;
  } else if (bf.status == tgb::BruteForceStatus::kLimitExceeded) {
    tgb::RunConfig cfg;
    cfg.node_budget = node_budget;
    cfg.decision_budget = node_budget;
    auto policy = tgb::make_baseline_policy("relpscost", 0);
    tgb::RunStats stats = tgb::run_bnb(ni.normalized, *policy, cfg);
    if (stats.best_objective < tgb::kInf) cutoff = stats.best_objective;
  }
  write_file(cache, cutoff ? tgb::format_real(*cutoff) + "\n" : "none\n");
  return cutoff;
}

struct EvalJob {
  const NamedInstance* instance;
  std::optional<double> cutoff;
  std::uint64_t seed;
  std::string policy;
};

tgb::ResultRow run_eval_job(const EvalJob& job, const tgb::Checkpoint* ckpt,
                            std::int64_t node_budget) {
  tgb::RunConfig cfg;
  cfg.cutoff = job.cutoff;
  cfg.node_budget = node_budget;
  cfg.decision_budget = node_budget;
  cfg.seed = job.seed;
  tgb::RunStats stats;
  if (job.policy == "tgppo") {
    if (!ckpt) throw tgb::Error("NO_CHECKPOINT");
    tgb::TgNet net(ckpt->cfg);
    tgb::NetRolloutPolicy policy(net, ckpt->params, job.seed,
                                 /*greedy=*/true);
    stats = tgb::run_bnb(job.instance->normalized, policy, cfg);
  } else {
    auto policy = tgb::make_baseline_policy(job.policy, job.seed);
    stats = tgb::run_bnb(job.instance->normalized, *policy, cfg);
  }
  tgb::ResultRow row;
  row.instance = job.instance->raw.name;
  row.seed = job.seed;
  row.policy = job.policy;
  row.nodes = stats.nodes_explored;
  row.pdi = stats.pdi;
  row.status = stats.status;
  row.clock = stats.clock;
  return row;
}

int cmd_generate(const std::string& family, int rows, int cols, double density,
                 int count, std::uint64_t seed, const std::string& out_dir) {
  tgb::GeneratorParams p;
  if (family == "set_cover") p.family = tgb::GeneratorFamily::kSetCover;
  else if (family == "multi_knapsack")
    p.family = tgb::GeneratorFamily::kMultiKnapsack;
  else if (family == "mixed_random")
    p.family = tgb::GeneratorFamily::kMixedRandom;
  else
    throw tgb::Error("UNKNOWN_FAMILY", family);
  p.rows = rows;
  p.cols = cols;
  p.density = density;
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    p.seed = seed + static_cast<std::uint64_t>(i);
    tgb::MilpInstance inst = tgb::generate_instance(p);
    write_file(fs::path(out_dir) / (inst.name + ".milp"),
               tgb::serialize_instance(inst));
  }
  std::cout << "generated " << count << " instances in " << out_dir << "\n";
  return 0;
}

std::vector<tgb::TrainTask> make_tasks(const std::vector<NamedInstance>& data,
                                       const std::string& cutoff_spec,
                                       std::int64_t node_budget) {
  std::vector<tgb::TrainTask> tasks;
  for (const NamedInstance& ni : data)
    tasks.push_back({ni.normalized, resolve_cutoff(cutoff_spec, ni,
                                                   node_budget)});
  return tasks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"miniature branch-and-bound with learned branching"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write synthetic instances");
  std::string g_family = "set_cover", g_out = ".";
  int g_rows = 8, g_cols = 12, g_count = 1;
  double g_density = 0.3;
  std::uint64_t g_seed = 0;
  gen->add_option("--family", g_family,
                  "set_cover | multi_knapsack | mixed_random");
  gen->add_option("--rows", g_rows);
  gen->add_option("--cols", g_cols);
  gen->add_option("--density", g_density);
  gen->add_option("--count", g_count);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out)->required();

  // baseline
  auto* base = app.add_subcommand("baseline", "acquire baseline statistics");
  std::string b_data, b_seeds = "0..4", b_out = "manifest.csv",
              b_cutoff = "AUTO";
  std::int64_t b_budget = 100000;
  base->add_option("--data", b_data)->required();
  base->add_option("--seeds", b_seeds);
  base->add_option("--budget-nodes", b_budget);
  base->add_option("--cutoff", b_cutoff);
  base->add_option("--out", b_out)->required();

  // solve
  auto* solve = app.add_subcommand("solve", "run one search");
  std::string s_instance, s_policy = "most_fractional", s_cutoff = "AUTO",
              s_checkpoint, s_event_log;
  std::uint64_t s_seed = 0;
  std::int64_t s_budget = 100000;
  solve->add_option("--instance", s_instance)->required();
  solve->add_option("--policy", s_policy, "baseline name or tgppo");
  solve->add_option("--seed", s_seed);
  solve->add_option("--cutoff", s_cutoff, "AUTO or a value");
  solve->add_option("--budget-nodes", s_budget);
  solve->add_option("--checkpoint", s_checkpoint);
  solve->add_option("--event-log", s_event_log);

  // train
  auto* tr = app.add_subcommand("train", "train the branching policy");
  std::string t_data, t_config, t_out = "policy.ckpt", t_log, t_manifest,
              t_cutoff = "AUTO";
  int t_episodes = 500;
  std::uint64_t t_seed = 0;
  std::int64_t t_budget = 100000;
  tr->add_option("--data", t_data)->required();
  tr->add_option("--config", t_config, "key = value hyperparameter file");
  tr->add_option("--episodes", t_episodes);
  tr->add_option("--seed", t_seed);
  tr->add_option("--budget-nodes", t_budget);
  tr->add_option("--cutoff", t_cutoff);
  tr->add_option("--out", t_out);
  tr->add_option("--log", t_log);
  tr->add_option("--manifest", t_manifest);

  // tune
  auto* tune = app.add_subcommand("tune", "nested cross-validation search");
  std::string u_data, u_out = "best.cfg", u_cutoff = "AUTO";
  int u_trials = 8, u_outer = 5, u_inner = 2, u_episodes = 2;
  std::uint64_t u_seed = 0;
  std::int64_t u_budget = 1000;
  tune->add_option("--data", u_data)->required();
  tune->add_option("--trials", u_trials);
  tune->add_option("--outer", u_outer);
  tune->add_option("--inner", u_inner);
  tune->add_option("--episodes-per-trial", u_episodes);
  tune->add_option("--seed", u_seed);
  tune->add_option("--budget-nodes", u_budget);
  tune->add_option("--cutoff", u_cutoff);
  tune->add_option("--out", u_out);

  // eval
  auto* ev = app.add_subcommand("eval", "run policies over a dataset");
  std::string e_data, e_checkpoint, e_baselines = "all", e_seeds = "0..4",
              e_out = "results.csv", e_cutoff = "AUTO";
  std::int64_t e_budget = 100000;
  int e_workers = 1;
  ev->add_option("--data", e_data)->required();
  ev->add_option("--checkpoint", e_checkpoint);
  ev->add_option("--baselines", e_baselines, "all | comma list | none");
  ev->add_option("--seeds", e_seeds);
  ev->add_option("--budget-nodes", e_budget);
  ev->add_option("--cutoff", e_cutoff);
  ev->add_option("--workers", e_workers);
  ev->add_option("--out", e_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "render a results markdown report");
  std::string r_results, r_out = "report.md", r_learned = "tgppo";
  rep->add_option("--results", r_results)->required();
  rep->add_option("--learned", r_learned);
  rep->add_option("--out", r_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors exit 1, --help exits 0.
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed())
      return cmd_generate(g_family, g_rows, g_cols, g_density, g_count,
                          g_seed, g_out);

    if (base->parsed()) {
      std::vector<NamedInstance> data = load_dir(b_data);
      for (const NamedInstance& ni : data) {
        std::optional<double> cutoff = resolve_cutoff(b_cutoff, ni, b_budget);
        for (std::uint64_t seed : parse_seed_range(b_seeds)) {
          tgb::RunConfig cfg;
          cfg.cutoff = cutoff;
          cfg.node_budget = b_budget;
          cfg.decision_budget = b_budget;
          tgb::BaselineStats bs =
              tgb::acquire_baseline(ni.normalized, seed, cfg, b_out);
          std::cout << bs.instance << " seed " << seed << " B "
                    << tgb::format_real(bs.nodes) << " status "
                    << tgb::run_status_name(bs.status) << "\n";
        }
      }
      return 0;
    }

    if (solve->parsed()) {
      NamedInstance ni = load_instance(s_instance);
      EvalJob job;
      job.instance = &ni;
      job.cutoff = resolve_cutoff(s_cutoff, ni, s_budget);
      job.seed = s_seed;
      job.policy = s_policy;
      std::optional<tgb::Checkpoint> ckpt;
      if (!s_checkpoint.empty()) ckpt = tgb::load_checkpoint(s_checkpoint);
      std::ofstream event_log;
      tgb::RunConfig cfg;
      cfg.cutoff = job.cutoff;
      cfg.node_budget = s_budget;
      cfg.decision_budget = s_budget;
      cfg.seed = s_seed;
      if (!s_event_log.empty()) {
        event_log.open(s_event_log, std::ios::trunc);
        cfg.event_log = &event_log;
      }
      tgb::RunStats stats;
      if (s_policy == "tgppo") {
        if (!ckpt) throw tgb::Error("NO_CHECKPOINT");
        tgb::TgNet net(ckpt->cfg);
        tgb::NetRolloutPolicy policy(net, ckpt->params, s_seed, true);
        stats = tgb::run_bnb(ni.normalized, policy, cfg);
      } else {
        auto policy = tgb::make_baseline_policy(s_policy, s_seed);
        stats = tgb::run_bnb(ni.normalized, *policy, cfg);
      }
      std::cout << "status=" << tgb::run_status_name(stats.status)
                << " nodes=" << stats.nodes_explored
                << " pdi=" << tgb::format_real(stats.pdi)
                << " dual=" << tgb::format_real(stats.dual_bound) << "\n";
      return 0;
    }

    if (tr->parsed()) {
      std::vector<NamedInstance> data = load_dir(t_data);
      tgb::SampledConfig sc;
      if (!t_config.empty()) sc = tgb::config_from_text(read_file(t_config));
      sc.train.episodes = t_episodes;
      sc.train.seed = t_seed;
      sc.net.seed = t_seed;
      tgb::RunConfig run_cfg;
      run_cfg.node_budget = t_budget;
      run_cfg.decision_budget = t_budget;
      std::vector<tgb::TrainTask> tasks =
          make_tasks(data, t_cutoff, t_budget);
      tgb::TrainResult res = tgb::train(tasks, sc.net, sc.train, run_cfg,
                                        t_manifest, t_log, t_out);
      std::cout << "trained " << res.log.size() << " episodes -> " << t_out
                << "\n";
      return 0;
    }

    if (tune->parsed()) {
      std::vector<NamedInstance> data = load_dir(u_data);
      tgb::RunConfig run_cfg;
      run_cfg.node_budget = u_budget;
      run_cfg.decision_budget = u_budget;
      std::vector<tgb::TuneItem> items;
      for (const NamedInstance& ni : data) {
        std::optional<double> cutoff = resolve_cutoff(u_cutoff, ni, u_budget);
        for (std::uint64_t seed : parse_seed_range("0..4")) {
          tgb::RunConfig cfg = run_cfg;
          cfg.cutoff = cutoff;
          tgb::BaselineStats bs =
              tgb::acquire_baseline(ni.normalized, seed, cfg);
          tgb::TuneItem it;
          it.instance = ni.normalized;
          it.cutoff = cutoff;
          it.seed = seed;
          it.baseline_nodes = bs.nodes;
          items.push_back(std::move(it));
        }
      }
      tgb::TuneConfig tcfg;
      tcfg.trials = u_trials;
      tcfg.outer_folds = u_outer;
      tcfg.inner_folds = u_inner;
      tcfg.episodes_per_trial = u_episodes;
      tcfg.seed = u_seed;
      tgb::TuneResult res = tgb::nested_cv_tune(items, tcfg, run_cfg);
      write_file(u_out, tgb::config_to_text(res.best));
      int pruned = 0;
      for (const tgb::TrialRecord& t : res.trials) pruned += t.pruned;
      std::cout << "tuned " << res.trials.size() << " trials (" << pruned
                << " pruned) -> " << u_out << "\n";
      return 0;
    }

    if (ev->parsed()) {
      std::vector<NamedInstance> data = load_dir(e_data);
      std::optional<tgb::Checkpoint> ckpt;
      if (!e_checkpoint.empty()) ckpt = tgb::load_checkpoint(e_checkpoint);

      std::vector<std::string> policies;
      if (e_baselines == "all") {
        policies = tgb::baseline_policy_names();
      } else if (e_baselines != "none") {
        std::stringstream ss(e_baselines);
        std::string name;
        while (std::getline(ss, name, ',')) policies.push_back(name);
      }
      if (ckpt) policies.push_back("tgppo");
      if (policies.empty()) throw tgb::Error("NO_POLICIES");

      std::vector<EvalJob> jobs;
      std::vector<std::optional<double>> cutoffs;
      for (const NamedInstance& ni : data)
        cutoffs.push_back(resolve_cutoff(e_cutoff, ni, e_budget));
      for (std::size_t i = 0; i < data.size(); ++i)
        for (std::uint64_t seed : parse_seed_range(e_seeds))
          for (const std::string& policy : policies)
            jobs.push_back({&data[i], cutoffs[i], seed, policy});

      std::vector<tgb::ResultRow> rows(jobs.size());
      int workers = std::max(1, e_workers);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size();
             i = next.fetch_add(1))
          rows[i] = run_eval_job(jobs[i], ckpt ? &*ckpt : nullptr, e_budget);
      };
      if (workers == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
      }
      // Sorted rows keep the CSV byte-stable across worker counts.
      std::sort(rows.begin(), rows.end(),
                [](const tgb::ResultRow& a, const tgb::ResultRow& b) {
                  return std::tie(a.instance, a.seed, a.policy) <
                         std::tie(b.instance, b.seed, b.policy);
                });
      tgb::write_results_csv(e_out, rows);
      std::cout << "wrote " << rows.size() << " rows -> " << e_out << "\n";
      return 0;
    }

    if (rep->parsed()) {
      std::vector<tgb::ResultRow> rows = tgb::read_results_csv(r_results);
      write_file(r_out, tgb::make_report(rows, r_learned));
      std::cout << "wrote " << r_out << "\n";
      return 0;
    }
  } catch (const tgb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
