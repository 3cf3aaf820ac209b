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

#ifndef TGBRANCH_MILP_HPP_
#define TGBRANCH_MILP_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tgbranch/error.hpp"

namespace tgb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kLe, kGe, kEq };

struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;

  bool operator==(const MatrixEntry&) const = default;
};

// A mixed-integer linear program in minimization form:
//   min c^T x   s.t.  A x (<=,>=,=) b,  l <= x <= u,  x_i integral for i in I.
// Instances are plain data; validate_instance() normalizes all rows to <=.
struct MilpInstance {
  std::string name;
  int num_vars = 0;
  int num_cons = 0;
  std::vector<double> objective;
  std::vector<MatrixEntry> constraint_matrix;  // row-major sorted triples
  std::vector<RowSense> row_senses;
  std::vector<double> rhs;
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;
  std::vector<bool> is_integer;

  bool operator==(const MilpInstance&) const = default;
};

enum class GeneratorFamily { kSetCover, kMultiKnapsack, kMixedRandom };

struct GeneratorParams {
  GeneratorFamily family = GeneratorFamily::kSetCover;
  int rows = 0;
  int cols = 0;
  double density = 0.5;
  int coeff_lo = 1;
  int coeff_hi = 10;
  std::uint64_t seed = 0;
};

// --- MPS subset -------------------------------------------------------------

// Parses a free-format MPS document (sections NAME/ROWS/COLUMNS/RHS/BOUNDS/
// ENDATA, INTORG/INTEND markers, bound keys LO/UP/FX/BV/MI/PL).  Integer
// columns declared inside markers default to [0,1] unless BOUNDS overrides.
// Throws Error: UNSUPPORTED_SECTION, MALFORMED_LINE, DUPLICATE_ENTRY.
MilpInstance parse_mps(const std::string& text);

// --- Native serialization ---------------------------------------------------

// Line-oriented UTF-8 format with 17-significant-digit reals and -inf/+inf
// literals; parse(serialize(x)) == x bit-faithfully.
std::string serialize_instance(const MilpInstance& inst);
MilpInstance parse_instance(const std::string& text);

// Renders a double with 17 significant digits ("-inf"/"+inf" for infinities).
std::string format_real(double v);
double parse_real(const std::string& s);

// --- Generation -------------------------------------------------------------

// Deterministic in params.seed.  Throws Error(INFEASIBLE_PARAMS) when the
// set-cover coverage invariant cannot be met.
MilpInstance generate_instance(const GeneratorParams& p);

// --- Validation -------------------------------------------------------------

// Normalizes every row to <= form (GE rows are sign-flipped, EQ rows split
// into a <= pair).  Errors are reported, never silently fixed.
struct ValidationResult {
  std::optional<MilpInstance> normalized;  // set iff errors is empty
  std::vector<std::string> errors;         // e.g. "CROSSING_BOUNDS(0)"
};
ValidationResult validate_instance(const MilpInstance& inst);

// --- Brute-force oracle -----------------------------------------------------

enum class BruteForceStatus { kOptimal, kInfeasible, kLimitExceeded };

struct BruteForceResult {
  BruteForceStatus status = BruteForceStatus::kInfeasible;
  double objective = kInf;
  std::vector<double> solution;
};

// Enumerates every integer assignment (integer bounds must be finite) and
// solves the continuous remainder by LP.  Independent test oracle for the
// branch-and-bound engine.
BruteForceResult brute_force_solve(const MilpInstance& inst,
                                   std::int64_t enum_limit = 1 << 20);

}  // namespace tgb

#endif  // TGBRANCH_MILP_HPP_
