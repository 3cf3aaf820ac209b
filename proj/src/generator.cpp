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
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "tgbranch/milp.hpp"

namespace tgb {

namespace {

// Thin RNG wrapper: all draws go through explicit modular reductions so the
// stream does not depend on the standard library's distribution details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(raw() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double uniform01() {
    return static_cast<double>(raw() >> 11) * (1.0 / 9007199254740992.0);
  }

 private:
  std::mt19937_64 engine_;
};

std::string family_name(GeneratorFamily f) {
  switch (f) {
    case GeneratorFamily::kSetCover: return "sc";
    case GeneratorFamily::kMultiKnapsack: return "mk";
    case GeneratorFamily::kMixedRandom: return "mx";
  }
  return "??";
}

MilpInstance generate_set_cover(const GeneratorParams& p, Rng& rng) {
  const int m = p.rows, n = p.cols;
  auto target_nnz = static_cast<std::int64_t>(std::llround(p.density * m * n));
  if (target_nnz < std::max(m, n))
    throw Error("INFEASIBLE_PARAMS",
                "density too low to cover all rows and columns");

  std::set<std::pair<int, int>> cover;
  // Every column covers at least one row, every row gets at least one column.
  for (int j = 0; j < n; ++j) cover.insert({rng.uniform_int(0, m - 1), j});
  for (int i = 0; i < m; ++i) {
    bool covered = false;
    for (int j = 0; j < n && !covered; ++j) covered = cover.count({i, j}) > 0;
    if (!covered) cover.insert({i, rng.uniform_int(0, n - 1)});
  }
  while (static_cast<std::int64_t>(cover.size()) < target_nnz)
    cover.insert({rng.uniform_int(0, m - 1), rng.uniform_int(0, n - 1)});

  MilpInstance inst;
  inst.num_vars = n;
  inst.num_cons = m;
  inst.objective.resize(n);
  for (int j = 0; j < n; ++j)
    inst.objective[j] = rng.uniform_int(p.coeff_lo, p.coeff_hi);
  for (const auto& [i, j] : cover)
    inst.constraint_matrix.push_back({i, j, 1.0});
  inst.row_senses.assign(m, RowSense::kGe);
  inst.rhs.assign(m, 1.0);
  inst.lower_bounds.assign(n, 0.0);
  inst.upper_bounds.assign(n, 1.0);
  inst.is_integer.assign(n, true);
  return inst;
}

MilpInstance generate_multi_knapsack(const GeneratorParams& p, Rng& rng) {
  const int m = p.rows, n = p.cols;
  MilpInstance inst;
  inst.num_vars = n;
  inst.num_cons = m;
  inst.objective.resize(n);
  for (int j = 0; j < n; ++j)
    inst.objective[j] = -rng.uniform_int(p.coeff_lo, p.coeff_hi);
  for (int i = 0; i < m; ++i) {
    double row_weight = 0.0;
    int nnz = 0;
    for (int j = 0; j < n; ++j) {
      // Every row keeps one pinned column and every column lands in at
      // least one row, so no variable is left unconstrained.
      bool keep = rng.uniform01() < p.density || j == i % n || i == j % m;
      if (!keep) continue;
      double w = rng.uniform_int(p.coeff_lo, p.coeff_hi);
      inst.constraint_matrix.push_back({i, j, w});
      row_weight += w;
      ++nnz;
    }
    double cap = std::max(1.0, std::floor(0.5 * row_weight));
    inst.rhs.push_back(cap);
    (void)nnz;
  }
  inst.row_senses.assign(m, RowSense::kLe);
  inst.lower_bounds.assign(n, 0.0);
  inst.upper_bounds.assign(n, 1.0);
  inst.is_integer.assign(n, true);
  return inst;
}

MilpInstance generate_mixed_random(const GeneratorParams& p, Rng& rng) {
  const int m = p.rows, n = p.cols;
  MilpInstance inst;
  inst.num_vars = n;
  inst.num_cons = m;
  // At least one continuous variable exercises the mixed case.
  int n_cont = std::max(1, n / 4);
  inst.is_integer.assign(n, true);
  for (int k = 0; k < n_cont; ++k) inst.is_integer[n - 1 - k] = false;
  inst.objective.resize(n);
  for (int j = 0; j < n; ++j)
    inst.objective[j] = rng.uniform_int(-p.coeff_hi, p.coeff_hi);
  inst.lower_bounds.assign(n, 0.0);
  inst.upper_bounds.resize(n);
  for (int j = 0; j < n; ++j)
    inst.upper_bounds[j] = inst.is_integer[j] ? 1.0 : 10.0;
  for (int i = 0; i < m; ++i) {
    double pos_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      // Every row keeps one pinned column and every column lands in at
      // least one row, so no variable is left unconstrained.
      bool keep = rng.uniform01() < p.density || j == i % n || i == j % m;
      if (!keep) continue;
      double a = rng.uniform_int(p.coeff_lo, p.coeff_hi);
      inst.constraint_matrix.push_back({i, j, a});
      pos_sum += a * inst.upper_bounds[j];
    }
    // x = 0 stays feasible; rhs below the row maximum keeps rows binding.
    inst.rhs.push_back(std::max(1.0, std::floor(0.4 * pos_sum)));
  }
  inst.row_senses.assign(m, RowSense::kLe);
  return inst;
}

}  // namespace

MilpInstance generate_instance(const GeneratorParams& p) {
  if (p.rows <= 0 || p.cols <= 0 || p.density <= 0.0 || p.density > 1.0 ||
      p.coeff_lo > p.coeff_hi ||
      (p.family == GeneratorFamily::kSetCover && p.coeff_lo < 1))
    throw Error("INFEASIBLE_PARAMS", "invalid generator parameters");
  Rng rng(p.seed ^ (static_cast<std::uint64_t>(p.family) << 32));
  MilpInstance inst;
  switch (p.family) {
    case GeneratorFamily::kSetCover:
      inst = generate_set_cover(p, rng);
      break;
    case GeneratorFamily::kMultiKnapsack:
      inst = generate_multi_knapsack(p, rng);
      break;
    case GeneratorFamily::kMixedRandom:
      inst = generate_mixed_random(p, rng);
      break;
  }
  inst.name = family_name(p.family) + std::to_string(p.rows) + "x" +
              std::to_string(p.cols) + "_s" + std::to_string(p.seed);
  std::sort(inst.constraint_matrix.begin(), inst.constraint_matrix.end(),
            [](const MatrixEntry& a, const MatrixEntry& b) {
              return std::tie(a.row, a.col) < std::tie(b.row, b.col);
            });
  return inst;
}

}  // namespace tgb
