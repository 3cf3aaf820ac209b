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
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tgbranch/milp.hpp"
#include "tgbranch/simplex.hpp"

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(TGB_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
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

}  // namespace

TEST_CASE("mps: minimal two-variable document with binary markers") {
  const std::string text =
      "NAME TEST\n"
      "ROWS\n"
      " N OBJ\n"
      " L C1\n"
      "COLUMNS\n"
      " MARKER 'MARKER' 'INTORG'\n"
      " X1 OBJ 1.0 C1 1.0\n"
      " X2 OBJ 2.0 C1 1.0\n"
      " MARKER 'MARKER' 'INTEND'\n"
      "RHS\n"
      " RHS C1 1.0\n"
      "ENDATA\n";
  tgb::MilpInstance inst = tgb::parse_mps(text);
  CHECK(inst.num_vars == 2);
  CHECK(inst.num_cons == 1);
  CHECK(inst.is_integer == std::vector<bool>{true, true});
  CHECK(inst.lower_bounds == std::vector<double>{0.0, 0.0});
  CHECK(inst.upper_bounds == std::vector<double>{1.0, 1.0});
  CHECK(inst.objective == std::vector<double>{1.0, 2.0});
  CHECK(inst.row_senses == std::vector<tgb::RowSense>{tgb::RowSense::kLe});
}

TEST_CASE("mps: continuous columns default to [0, +inf)") {
  const std::string text =
      "NAME T\n"
      "ROWS\n"
      " N OBJ\n"
      " G C1\n"
      "COLUMNS\n"
      " Y1 OBJ 1.5 C1 2.0\n"
      "RHS\n"
      " RHS C1 3.0\n"
      "ENDATA\n";
  tgb::MilpInstance inst = tgb::parse_mps(text);
  CHECK(inst.is_integer == std::vector<bool>{false});
  CHECK(inst.lower_bounds[0] == 0.0);
  CHECK(inst.upper_bounds[0] == tgb::kInf);
  CHECK(inst.row_senses[0] == tgb::RowSense::kGe);
}

TEST_CASE("mps: BOUNDS keys override defaults") {
  const std::string text =
      "NAME T\n"
      "ROWS\n"
      " N OBJ\n"
      " L C1\n"
      "COLUMNS\n"
      " X1 OBJ 1.0 C1 1.0\n"
      " X2 OBJ 1.0 C1 1.0\n"
      " X3 OBJ 1.0 C1 1.0\n"
      "RHS\n"
      " RHS C1 10.0\n"
      "BOUNDS\n"
      " LO BND X1 -2.0\n"
      " UP BND X1 7.0\n"
      " FX BND X2 3.0\n"
      " MI BND X3\n"
      "ENDATA\n";
  tgb::MilpInstance inst = tgb::parse_mps(text);
  CHECK(inst.lower_bounds[0] == -2.0);
  CHECK(inst.upper_bounds[0] == 7.0);
  CHECK(inst.lower_bounds[1] == 3.0);
  CHECK(inst.upper_bounds[1] == 3.0);
  CHECK(inst.lower_bounds[2] == -tgb::kInf);
}

TEST_CASE("mps: RANGES section is rejected by name") {
  const std::string text =
      "NAME T\n"
      "ROWS\n"
      " N OBJ\n"
      "COLUMNS\n"
      " X1 OBJ 1.0\n"
      "RANGES\n"
      " R C1 1.0\n"
      "ENDATA\n";
  CHECK_THROWS_WITH_AS(tgb::parse_mps(text), "UNSUPPORTED_SECTION(RANGES)",
                       tgb::Error);
}

TEST_CASE("mps: malformed line reports its number") {
  const std::string text =
      "NAME T\n"
      "ROWS\n"
      " N OBJ\n"
      "COLUMNS\n"
      " X1 OBJ notanumber\n"
      "ENDATA\n";
  try {
    tgb::parse_mps(text);
    FAIL("expected throw");
  } catch (const tgb::Error& e) {
    CHECK(e.code() == "MALFORMED_LINE");
    CHECK(e.detail().find("5") != std::string::npos);
  }
}

TEST_CASE("mps: sc3x4 fixture has brute-force optimum 1") {
  tgb::MilpInstance inst = tgb::parse_mps(read_fixture("sc3x4.mps"));
  CHECK(inst.num_vars == 4);
  CHECK(inst.num_cons == 3);
  tgb::BruteForceResult res = tgb::brute_force_solve(inst);
  REQUIRE(res.status == tgb::BruteForceStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("format_real handles infinities and round-trips doubles") {
  CHECK(tgb::format_real(tgb::kInf) == "+inf");
  CHECK(tgb::format_real(-tgb::kInf) == "-inf");
  CHECK(tgb::parse_real("+inf") == tgb::kInf);
  CHECK(tgb::parse_real("-inf") == -tgb::kInf);
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 3.14159265358979312e8}) {
    CHECK(tgb::parse_real(tgb::format_real(v)) == v);
  }
}

TEST_CASE("serialization round-trips the knapsack instance exactly") {
  tgb::MilpInstance inst = knapsack2();
  inst.upper_bounds[1] = tgb::kInf;  // exercise the infinity literal
  tgb::MilpInstance back = tgb::parse_instance(tgb::serialize_instance(inst));
  CHECK(back == inst);
}

TEST_CASE("serialization round-trip property over generated instances") {
  using tgb::GeneratorFamily;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    for (GeneratorFamily fam :
         {GeneratorFamily::kSetCover, GeneratorFamily::kMultiKnapsack,
          GeneratorFamily::kMixedRandom}) {
      tgb::GeneratorParams p;
      p.family = fam;
      p.rows = 3 + static_cast<int>(seed % 4);
      p.cols = 4 + static_cast<int>(seed % 5);
      p.density = 0.6;
      p.seed = seed;
      tgb::MilpInstance inst = tgb::generate_instance(p);
      tgb::MilpInstance back =
          tgb::parse_instance(tgb::serialize_instance(inst));
      CHECK(back == inst);
    }
  }
}

TEST_CASE("generate_instance is deterministic in its params") {
  tgb::GeneratorParams p;
  p.family = tgb::GeneratorFamily::kSetCover;
  p.rows = 3;
  p.cols = 4;
  p.density = 0.7;
  p.seed = 7;
  std::string a = tgb::serialize_instance(tgb::generate_instance(p));
  std::string b = tgb::serialize_instance(tgb::generate_instance(p));
  CHECK(a == b);
}

TEST_CASE("generate_instance: set cover with impossible density") {
  tgb::GeneratorParams p;
  p.family = tgb::GeneratorFamily::kSetCover;
  p.rows = 10;
  p.cols = 4;
  p.density = 0.01;
  p.seed = 1;
  CHECK_THROWS_AS(tgb::generate_instance(p), tgb::Error);
}

TEST_CASE("generate_instance: tiny multi-knapsack matches hand enumeration") {
  tgb::GeneratorParams p;
  p.family = tgb::GeneratorFamily::kMultiKnapsack;
  p.rows = 1;
  p.cols = 2;
  p.seed = 1;
  tgb::MilpInstance inst = tgb::generate_instance(p);
  tgb::BruteForceResult gen = tgb::brute_force_solve(inst);
  REQUIRE(gen.status == tgb::BruteForceStatus::kOptimal);

  // The published shape of this family: maximize value under one capacity
  // row, stated as minimization.  The fixed values {3,4}/{2,3}/cap 4 variant
  // is checked directly.
  tgb::BruteForceResult res = tgb::brute_force_solve(knapsack2());
  REQUIRE(res.status == tgb::BruteForceStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(res.solution == std::vector<double>{0.0, 1.0});
}

TEST_CASE("generate_instance: mixed family keeps a continuous variable") {
  tgb::GeneratorParams p;
  p.family = tgb::GeneratorFamily::kMixedRandom;
  p.rows = 4;
  p.cols = 6;
  p.seed = 3;
  tgb::MilpInstance inst = tgb::generate_instance(p);
  bool any_continuous = false;
  for (bool b : inst.is_integer) any_continuous |= !b;
  CHECK(any_continuous);
}

TEST_CASE("validate_instance flips GE rows and splits EQ rows") {
  tgb::MilpInstance inst;
  inst.num_vars = 1;
  inst.num_cons = 2;
  inst.objective = {1.0};
  inst.constraint_matrix = {{0, 0, 2.0}, {1, 0, 5.0}};
  inst.row_senses = {tgb::RowSense::kGe, tgb::RowSense::kEq};
  inst.rhs = {3.0, 10.0};
  inst.lower_bounds = {0.0};
  inst.upper_bounds = {10.0};
  inst.is_integer = {false};
  tgb::ValidationResult vr = tgb::validate_instance(inst);
  REQUIRE(vr.errors.empty());
  REQUIRE(vr.normalized.has_value());
  const tgb::MilpInstance& n = *vr.normalized;
  CHECK(n.num_cons == 3);  // GE flipped + EQ split into a pair
  for (tgb::RowSense s : n.row_senses) CHECK(s == tgb::RowSense::kLe);
  // GE row 2x >= 3 becomes -2x <= -3.
  CHECK(n.constraint_matrix[0].value == -2.0);
  CHECK(n.rhs[0] == -3.0);
}

TEST_CASE("validate_instance reports crossing bounds") {
  tgb::MilpInstance inst = knapsack2();
  inst.lower_bounds[0] = 2.0;
  inst.upper_bounds[0] = 1.0;
  tgb::ValidationResult vr = tgb::validate_instance(inst);
  CHECK(!vr.normalized.has_value());
  REQUIRE(!vr.errors.empty());
  bool found = false;
  for (const std::string& e : vr.errors)
    if (e == "CROSSING_BOUNDS(0)") found = true;
  CHECK(found);
}

TEST_CASE("brute force: infeasible all-integer instance") {
  tgb::MilpInstance inst = knapsack2();
  inst.rhs = {-1.0};  // 2x1 + 3x2 <= -1 has no binary solution
  tgb::BruteForceResult res = tgb::brute_force_solve(inst);
  CHECK(res.status == tgb::BruteForceStatus::kInfeasible);
}

TEST_CASE("brute force: enum limit exceeded") {
  tgb::MilpInstance inst = knapsack2();
  inst.upper_bounds = {100.0, 100.0};
  tgb::BruteForceResult res = tgb::brute_force_solve(inst, 100);
  CHECK(res.status == tgb::BruteForceStatus::kLimitExceeded);
}

TEST_CASE("brute force: pure-LP instance equals the simplex optimum") {
  tgb::MilpInstance inst = knapsack2();
  inst.is_integer = {false, false};
  tgb::BruteForceResult res = tgb::brute_force_solve(inst);
  tgb::LpOutcome lp = tgb::solve_lp(
      tgb::lp_relaxation(inst, inst.lower_bounds, inst.upper_bounds));
  REQUIRE(res.status == tgb::BruteForceStatus::kOptimal);
  REQUIRE(lp.status == tgb::LpStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(lp.objective_value).epsilon(1e-9));
}

TEST_CASE("brute force: unbounded integer variable is rejected") {
  tgb::MilpInstance inst = knapsack2();
  inst.upper_bounds[0] = tgb::kInf;
  CHECK_THROWS_AS(tgb::brute_force_solve(inst), tgb::Error);
}
