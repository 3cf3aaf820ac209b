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

// Exhaustive integer enumeration with LP completion: the independent oracle
// the branch-and-bound engine is tested against.

#include <cmath>
#include <vector>

#include "tgbranch/milp.hpp"
#include "tgbranch/simplex.hpp"

namespace tgb {

BruteForceResult brute_force_solve(const MilpInstance& raw,
                                   std::int64_t enum_limit) {
  ValidationResult vr = validate_instance(raw);
  if (!vr.normalized)
    throw Error("INVALID_INSTANCE",
                vr.errors.empty() ? "" : vr.errors.front());
  const MilpInstance& inst = *vr.normalized;

  std::vector<int> int_vars;
  for (int j = 0; j < inst.num_vars; ++j)
    if (inst.is_integer[j]) int_vars.push_back(j);

  std::int64_t combos = 1;
  for (int j : int_vars) {
    double lo = inst.lower_bounds[j], up = inst.upper_bounds[j];
    if (!std::isfinite(lo) || !std::isfinite(up))
      throw Error("UNBOUNDED_INTEGER", std::to_string(j));
    std::int64_t range =
        static_cast<std::int64_t>(std::floor(up) - std::ceil(lo)) + 1;
    if (range <= 0) return {BruteForceStatus::kInfeasible, kInf, {}};
    combos *= range;
    if (combos > enum_limit) return {BruteForceStatus::kLimitExceeded, kInf, {}};
  }

  bool pure_integer = int_vars.size() == static_cast<std::size_t>(inst.num_vars);

  BruteForceResult best{BruteForceStatus::kInfeasible, kInf, {}};
  std::vector<double> assign(int_vars.size());
  for (std::size_t k = 0; k < int_vars.size(); ++k)
    assign[k] = std::ceil(inst.lower_bounds[int_vars[k]]);

  std::vector<double> lower = inst.lower_bounds;
  std::vector<double> upper = inst.upper_bounds;
  for (std::int64_t it = 0; it < combos; ++it) {
    if (pure_integer) {
      std::vector<double> x(inst.num_vars, 0.0);
      for (std::size_t k = 0; k < int_vars.size(); ++k)
        x[int_vars[k]] = assign[k];
      std::vector<double> lhs(inst.num_cons, 0.0);
      for (const MatrixEntry& e : inst.constraint_matrix)
        lhs[e.row] += e.value * x[e.col];
      bool feasible = true;
      for (int i = 0; i < inst.num_cons && feasible; ++i)
        if (lhs[i] > inst.rhs[i] + 1e-9) feasible = false;
      if (feasible) {
        double obj = 0.0;
        for (int j = 0; j < inst.num_vars; ++j) obj += inst.objective[j] * x[j];
        if (obj < best.objective) {
          best.status = BruteForceStatus::kOptimal;
          best.objective = obj;
          best.solution = x;
        }
      }
    } else {
      for (std::size_t k = 0; k < int_vars.size(); ++k)
        lower[int_vars[k]] = upper[int_vars[k]] = assign[k];
      LpOutcome out = solve_lp(lp_relaxation(inst, lower, upper));
      if (out.status == LpStatus::kUnbounded)
        throw Error("UNBOUNDED_CONTINUOUS");
      if (out.status == LpStatus::kOptimal &&
          out.objective_value < best.objective) {
        best.status = BruteForceStatus::kOptimal;
        best.objective = out.objective_value;
        best.solution = out.solution;
      }
    }
    // Odometer increment over the integer box.
    for (std::size_t k = 0; k < int_vars.size(); ++k) {
      int j = int_vars[k];
      if (assign[k] + 1.0 <= std::floor(inst.upper_bounds[j])) {
        assign[k] += 1.0;
        break;
      }
      assign[k] = std::ceil(inst.lower_bounds[j]);
    }
  }
  return best;
}

}  // namespace tgb
