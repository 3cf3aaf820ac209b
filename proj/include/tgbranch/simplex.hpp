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

#ifndef TGBRANCH_SIMPLEX_HPP_
#define TGBRANCH_SIMPLEX_HPP_

#include <vector>

#include "tgbranch/milp.hpp"

namespace tgb {

// LP in the solver's canonical form: min c^T x, A x <= b, lower <= x <= upper.
// Bounds are node-local working bounds and may differ from instance bounds.
struct LpProblem {
  std::vector<double> objective;
  std::vector<MatrixEntry> rows;  // <= rows only
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
enum class BasisStatus { kBasic, kAtLower, kAtUpper };

struct LpOutcome {
  LpStatus status = LpStatus::kIterationLimit;
  double objective_value = 0.0;
  std::vector<double> solution;       // structural variables only
  std::vector<BasisStatus> basis;     // structural variables only
  int iterations = 0;
};

struct LpLimits {
  int max_iterations = 50000;
};

// Bounded-variable two-phase primal simplex under Bland's anti-cycling rule.
// Dense basis inverse, refactored every 50 pivots.  Feasibility tolerance
// 1e-7, pivot threshold 1e-9.  Deterministic: identical inputs yield the
// identical pivot sequence.
LpOutcome solve_lp(const LpProblem& p, const LpLimits& limits = {});

// Builds the LP relaxation of a validated (all-LE) instance with the given
// working bounds.
LpProblem lp_relaxation(const MilpInstance& inst,
                        const std::vector<double>& lower,
                        const std::vector<double>& upper);

}  // namespace tgb

#endif  // TGBRANCH_SIMPLEX_HPP_
