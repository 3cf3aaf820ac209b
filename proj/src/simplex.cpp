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

#include "tgbranch/simplex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace tgb {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorInterval = 50;

enum class VarStatus { kBasic, kAtLower, kAtUpper, kFree };

// Working problem over structural + slack + artificial variables:
//   A x + s + sigma a = b  with s >= 0, a >= 0 (phase 1 only).
class SimplexSolver {
 public:
  SimplexSolver(const LpProblem& p, const LpLimits& limits)
      : p_(p), limits_(limits), m_(static_cast<int>(p.rhs.size())),
        n_(static_cast<int>(p.objective.size())) {}

  LpOutcome solve();

 private:
  int total() const { return n_ + 2 * m_; }
  bool is_artificial(int j) const { return j >= n_ + m_; }

  void build_columns();
  void initialize();
  void refactor();
  double reduced_cost(int j, const Eigen::VectorXd& y) const;
  Eigen::VectorXd ftran(int j) const;  // Binv * column j
  // Runs simplex on cost_ until optimal/unbounded/limit.  Returns status.
  LpStatus iterate(bool phase_one);

  const LpProblem& p_;
  const LpLimits& limits_;
  int m_, n_;

  std::vector<std::vector<MatrixEntry>> cols_;  // per structural var
  std::vector<double> cost_;
  std::vector<double> lo_, up_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  std::vector<int> basis_;  // basic variable per row
  Eigen::MatrixXd binv_;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

void SimplexSolver::build_columns() {
  cols_.assign(n_, {});
  for (const MatrixEntry& e : p_.rows) cols_[e.col].push_back(e);
}

void SimplexSolver::initialize() {
  lo_.assign(total(), 0.0);
  up_.assign(total(), kInf);
  status_.assign(total(), VarStatus::kAtLower);
  x_.assign(total(), 0.0);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = p_.lower[j];
    up_[j] = p_.upper[j];
    if (std::isfinite(lo_[j])) {
      status_[j] = VarStatus::kAtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      status_[j] = VarStatus::kAtUpper;
      x_[j] = up_[j];
    } else {
      status_[j] = VarStatus::kFree;
      x_[j] = 0.0;
    }
  }
  // Row residuals at the nonbasic point decide slack vs artificial basis.
  std::vector<double> resid(p_.rhs);
  for (const MatrixEntry& e : p_.rows) resid[e.row] -= e.value * x_[e.col];

  basis_.assign(m_, -1);
  binv_ = Eigen::MatrixXd::Identity(m_, m_);
  for (int i = 0; i < m_; ++i) {
    int slack = n_ + i;
    int art = n_ + m_ + i;
    if (resid[i] >= 0.0) {
      basis_[i] = slack;
      status_[slack] = VarStatus::kBasic;
      x_[slack] = resid[i];
      up_[art] = 0.0;  // unused artificial stays pinned at zero
    } else {
      basis_[i] = art;
      status_[art] = VarStatus::kBasic;
      x_[art] = -resid[i];
      status_[slack] = VarStatus::kAtLower;
      binv_(i, i) = -1.0;  // artificial basis column is -e_i
    }
  }
}

void SimplexSolver::refactor() {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
  for (int r = 0; r < m_; ++r) {
    int j = basis_[r];
    if (j < n_) {
      for (const MatrixEntry& e : cols_[j]) b(e.row, r) = e.value;
    } else if (j < n_ + m_) {
      b(j - n_, r) = 1.0;
    } else {
      b(j - n_ - m_, r) = -1.0;
    }
  }
  binv_ = b.partialPivLu().inverse();
  // Recompute basic values from scratch for accuracy.
  Eigen::VectorXd rhs_eff(m_);
  for (int i = 0; i < m_; ++i) rhs_eff(i) = p_.rhs[i];
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (const MatrixEntry& e : cols_[j]) rhs_eff(e.row) -= e.value * x_[j];
    } else if (j < n_ + m_) {
      rhs_eff(j - n_) -= x_[j];
    } else {
      rhs_eff(j - n_ - m_) += x_[j];
    }
  }
  Eigen::VectorXd xb = binv_ * rhs_eff;
  for (int r = 0; r < m_; ++r) x_[basis_[r]] = xb(r);
  pivots_since_refactor_ = 0;
}

Eigen::VectorXd SimplexSolver::ftran(int j) const {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
  if (j < n_) {
    for (const MatrixEntry& e : cols_[j]) col(e.row) = e.value;
  } else if (j < n_ + m_) {
    col(j - n_) = 1.0;
  } else {
    col(j - n_ - m_) = -1.0;
  }
  return binv_ * col;
}

double SimplexSolver::reduced_cost(int j, const Eigen::VectorXd& y) const {
  double d = cost_[j];
  if (j < n_) {
    for (const MatrixEntry& e : cols_[j]) d -= y(e.row) * e.value;
  } else if (j < n_ + m_) {
    d -= y(j - n_);
  } else {
    d += y(j - n_ - m_);
  }
  return d;
}

LpStatus SimplexSolver::iterate(bool phase_one) {
  while (true) {
    if (iterations_ >= limits_.max_iterations) return LpStatus::kIterationLimit;

    Eigen::VectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb(r) = cost_[basis_[r]];
    Eigen::VectorXd y = binv_.transpose() * cb;

    // Bland: first improving nonbasic variable by index.
    int enter = -1;
    int dir = 0;
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == VarStatus::kBasic) continue;
      if (lo_[j] == up_[j]) continue;  // fixed, cannot move
      double d = reduced_cost(j, y);
      if ((status_[j] == VarStatus::kAtLower || status_[j] == VarStatus::kFree) &&
          d < -kPivotTol) {
        enter = j;
        dir = 1;
        break;
      }
      if ((status_[j] == VarStatus::kAtUpper || status_[j] == VarStatus::kFree) &&
          d > kPivotTol) {
        enter = j;
        dir = -1;
        break;
      }
    }
    if (enter < 0) return LpStatus::kOptimal;

    ++iterations_;
    Eigen::VectorXd w = ftran(enter);

    // Step limit from the entering variable's own opposite bound.
    double t_bound = kInf;
    if (std::isfinite(lo_[enter]) && std::isfinite(up_[enter]))
      t_bound = up_[enter] - lo_[enter];

    // Ratio test over basic variables; Bland tie-break on variable index.
    double t_best = t_bound;
    int leave_row = -1;
    bool leave_at_upper = false;
    for (int r = 0; r < m_; ++r) {
      double wr = w(r);
      if (std::abs(wr) <= kPivotTol) continue;
      int b = basis_[r];
      double delta = -dir * wr;  // d x_b / d t
      double limit = kInf;
      bool to_upper = false;
      if (delta > 0) {
        if (std::isfinite(up_[b])) {
          limit = (up_[b] - x_[b]) / delta;
          to_upper = true;
        }
      } else {
        if (std::isfinite(lo_[b])) limit = (x_[b] - lo_[b]) / (-delta);
      }
      if (limit < -0.0) limit = 0.0;
      if (limit < t_best - kPivotTol ||
          (limit < t_best + kPivotTol && leave_row >= 0 &&
           b < basis_[leave_row])) {
        t_best = limit;
        leave_row = r;
        leave_at_upper = to_upper;
      }
    }

    if (!std::isfinite(t_best)) {
      // Phase-1 objective is bounded below by zero, so this is phase 2 only.
      return LpStatus::kUnbounded;
    }
    double t = std::max(0.0, t_best);

    // Apply the move.
    x_[enter] += dir * t;
    for (int r = 0; r < m_; ++r) x_[basis_[r]] -= dir * t * w(r);

    if (leave_row < 0) {
      // Bound flip, no basis change.
      status_[enter] =
          dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
      continue;
    }

    int leave = basis_[leave_row];
    x_[leave] = leave_at_upper ? up_[leave] : lo_[leave];
    status_[leave] = leave_at_upper ? VarStatus::kAtUpper : VarStatus::kAtLower;
    status_[enter] = VarStatus::kBasic;
    basis_[leave_row] = enter;

    // Eta update of the basis inverse.
    double pivot = w(leave_row);
    binv_.row(leave_row) /= pivot;
    for (int r = 0; r < m_; ++r) {
      if (r == leave_row) continue;
      double f = w(r);
      if (f != 0.0) binv_.row(r) -= f * binv_.row(leave_row);
    }
    if (++pivots_since_refactor_ >= kRefactorInterval) refactor();
    (void)phase_one;
  }
}

LpOutcome SimplexSolver::solve() {
  LpOutcome out;
  build_columns();
  initialize();

  bool need_phase_one = false;
  for (int r = 0; r < m_; ++r)
    if (is_artificial(basis_[r]) && x_[basis_[r]] > kFeasTol)
      need_phase_one = true;

  if (need_phase_one) {
    cost_.assign(total(), 0.0);
    for (int j = n_ + m_; j < total(); ++j) cost_[j] = 1.0;
    LpStatus st = iterate(true);
    if (st == LpStatus::kIterationLimit) {
      out.status = st;
      out.iterations = iterations_;
      return out;
    }
    double infeas = 0.0;
    for (int j = n_ + m_; j < total(); ++j) infeas += x_[j];
    if (infeas > kFeasTol) {
      out.status = LpStatus::kInfeasible;
      out.iterations = iterations_;
      return out;
    }
  }
  // Pin artificials at zero for phase 2; basic ones stay as degenerate 0s.
  for (int j = n_ + m_; j < total(); ++j) {
    up_[j] = 0.0;
    x_[j] = 0.0;
    if (status_[j] != VarStatus::kBasic) status_[j] = VarStatus::kAtLower;
  }

  cost_.assign(total(), 0.0);
  for (int j = 0; j < n_; ++j) cost_[j] = p_.objective[j];
  LpStatus st = iterate(false);
  out.iterations = iterations_;
  if (st != LpStatus::kOptimal) {
    out.status = st;
    return out;
  }
  if (m_ > 0) refactor();  // tighten basic values before reporting

  out.status = LpStatus::kOptimal;
  out.solution.resize(n_);
  out.basis.resize(n_);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) {
    out.solution[j] = x_[j];
    obj += p_.objective[j] * x_[j];
    switch (status_[j]) {
      case VarStatus::kBasic: out.basis[j] = BasisStatus::kBasic; break;
      case VarStatus::kAtUpper: out.basis[j] = BasisStatus::kAtUpper; break;
      default: out.basis[j] = BasisStatus::kAtLower; break;
    }
  }
  out.objective_value = obj;
  return out;
}

}  // namespace

LpOutcome solve_lp(const LpProblem& p, const LpLimits& limits) {
  SimplexSolver solver(p, limits);
  return solver.solve();
}

LpProblem lp_relaxation(const MilpInstance& inst,
                        const std::vector<double>& lower,
                        const std::vector<double>& upper) {
  LpProblem p;
  p.objective = inst.objective;
  p.rows = inst.constraint_matrix;
  p.rhs = inst.rhs;
  p.lower = lower;
  p.upper = upper;
  return p;
}

}  // namespace tgb
