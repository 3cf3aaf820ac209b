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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tgbranch/evalx.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(TGB_CLI_PATH) + " " + args + " 2>&1";
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe))
    r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("tgb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path copy_fixture(const fs::path& dir, const std::string& name) {
  fs::path dst = dir / name;
  fs::copy_file(fs::path(TGB_FIXTURE_DIR) / name, dst,
                fs::copy_options::overwrite_existing);
  return dst;
}

}  // namespace

TEST_CASE("solve matches the known two-variable knapsack run") {
  fs::path dir = fresh_dir("solve");
  fs::path inst = copy_fixture(dir, "knap2.mps");
  CmdResult r = run_cli("solve --instance " + inst.string() +
                        " --policy most_fractional --cutoff -4");
  CHECK(r.code == 0);
  CHECK(r.out.find("status=OPTIMAL nodes=5") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage errors from runtime errors") {
  CHECK(run_cli("").code == 1);                     // missing subcommand
  CHECK(run_cli("solve").code == 1);                // missing --instance
  CHECK(run_cli("--help").code == 0);
  CmdResult missing = run_cli("solve --instance /nonexistent.milp");
  CHECK(missing.code == 2);
  CHECK(missing.out.find("error:") != std::string::npos);
  fs::path dir = fresh_dir("badpolicy");
  fs::path inst = copy_fixture(dir, "knap2.mps");
  CHECK(run_cli("solve --instance " + inst.string() +
                " --policy no_such_policy").code == 2);
}

TEST_CASE("generate is deterministic and writes the requested count") {
  fs::path a = fresh_dir("gen_a");
  fs::path b = fresh_dir("gen_b");
  std::string args = "generate --family multi_knapsack --rows 4 --cols 6 "
                     "--density 0.4 --count 3 --seed 11 --out ";
  CHECK(run_cli(args + a.string()).code == 0);
  CHECK(run_cli(args + b.string()).code == 0);
  int count = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    REQUIRE(entry.path().extension() == ".milp");
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++count;
  }
  CHECK(count == 3);
}

TEST_CASE("AUTO cutoff is cached beside the instance and reused") {
  fs::path dir = fresh_dir("cutoff");
  fs::path inst = copy_fixture(dir, "knap2.mps");
  fs::path cache = inst;
  cache += ".cutoff";
  CmdResult first = run_cli("solve --instance " + inst.string() +
                            " --policy most_fractional --cutoff AUTO");
  CHECK(first.code == 0);
  CHECK(first.out.find("status=OPTIMAL nodes=5") != std::string::npos);
  REQUIRE(fs::exists(cache));
  CHECK(slurp(cache) == "-4\n");
  // A poisoned cache must be trusted without re-solving.
  {
    std::ofstream out(cache, std::ios::trunc);
    out << "-100\n";
  }
  // A cutoff below the optimum prunes the root outright.
  CmdResult second = run_cli("solve --instance " + inst.string() +
                             " --policy most_fractional --cutoff AUTO");
  CHECK(second.code == 0);
  CHECK(second.out.find("nodes=1") != std::string::npos);
}

TEST_CASE("baseline writes a manifest keyed by instance and seed range") {
  fs::path dir = fresh_dir("baseline");
  copy_fixture(dir, "knap2.mps");
  fs::path manifest = dir / "manifest.csv";
  CmdResult r = run_cli("baseline --data " + dir.string() +
                        " --seeds 0..2 --cutoff -4 --out " +
                        manifest.string());
  CHECK(r.code == 0);
  std::string text = slurp(manifest);
  CHECK(text.rfind("instance,seed,baseline_nodes,gap0,pdi0,status", 0) == 0);
  int rows = -1;  // header line is not a row
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 3);
}

TEST_CASE("eval and report pipeline is byte-stable across repeats and workers") {
  fs::path data = fresh_dir("pipe_data");
  fs::path out = fresh_dir("pipe_out");
  CHECK(run_cli("generate --family multi_knapsack --rows 3 --cols 6 "
                "--density 0.5 --count 2 --seed 5 --out " +
                data.string()).code == 0);
  std::string eval_args =
      "eval --data " + data.string() +
      " --baselines random,most_fractional --seeds 0..1 "
      "--budget-nodes 200 --cutoff AUTO --out ";
  fs::path csv1 = out / "r1.csv";
  fs::path csv2 = out / "r2.csv";
  fs::path csv3 = out / "r3.csv";
  CHECK(run_cli(eval_args + csv1.string()).code == 0);
  CHECK(run_cli(eval_args + csv2.string()).code == 0);
  CHECK(run_cli(eval_args + csv3.string() + " --workers 3").code == 0);
  std::string text = slurp(csv1);
  CHECK(text == slurp(csv2));
  CHECK(text == slurp(csv3));
  std::vector<tgb::ResultRow> rows = tgb::read_results_csv(csv1.string());
  CHECK(rows.size() == 2 * 2 * 2);  // instances x seeds x policies
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::tie(rows[i - 1].instance, rows[i - 1].seed,
                   rows[i - 1].policy) <=
          std::tie(rows[i].instance, rows[i].seed, rows[i].policy));
  }
  fs::path report = out / "report.md";
  CHECK(run_cli("report --results " + csv1.string() +
                " --learned most_fractional --out " +
                report.string()).code == 0);
  std::string md = slurp(report);
  CHECK(md.find("# Evaluation report") != std::string::npos);
  CHECK(md.find("% win (Nnodes)") != std::string::npos);
}

TEST_CASE("train produces a checkpoint usable by solve and eval") {
  fs::path data = fresh_dir("train_data");
  fs::path out = fresh_dir("train_out");
  CHECK(run_cli("generate --family multi_knapsack --rows 3 --cols 5 "
                "--density 0.5 --count 2 --seed 9 --out " +
                data.string()).code == 0);
  fs::path config = out / "config.txt";
  {
    std::ofstream cfg(config);
    cfg << "d_h = 16\nn_layers = 1\nn_heads = 2\ngate_depth = 2\n"
           "minibatch = 32\nhorizon = 64\n";
  }
  fs::path ckpt = out / "policy.ckpt";
  CmdResult tr = run_cli("train --data " + data.string() + " --config " +
                         config.string() +
                         " --episodes 2 --seed 1 --budget-nodes 100 "
                         "--cutoff AUTO --out " + ckpt.string() + " --log " +
                         (out / "train.csv").string() + " --manifest " +
                         (out / "manifest.csv").string());
  CHECK(tr.code == 0);
  REQUIRE(fs::exists(ckpt));
  std::string log = slurp(out / "train.csv");
  CHECK(log.rfind("episode,instance,seed,nodes,pdi,status,", 0) == 0);
  fs::path inst;
  for (const auto& entry : fs::directory_iterator(data))
    if (entry.path().extension() == ".milp") inst = entry.path();
  CmdResult sv = run_cli("solve --instance " + inst.string() +
                         " --policy tgppo --checkpoint " + ckpt.string() +
                         " --cutoff AUTO --budget-nodes 200");
  CHECK(sv.code == 0);
  CHECK(sv.out.find("status=") != std::string::npos);
}
