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

#include "tgbranch/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace tgb {

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "+inf" || s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw Error("MALFORMED_LINE", "bad real: " + s);
  return v;
}

std::string serialize_instance(const MilpInstance& inst) {
  std::ostringstream out;
  out << "tgbranch-instance 1\n";
  out << "name " << inst.name << "\n";
  out << "vars " << inst.num_vars << "\n";
  out << "cons " << inst.num_cons << "\n";
  out << "objective";
  for (double c : inst.objective) out << " " << format_real(c);
  out << "\n";
  out << "senses";
  for (RowSense s : inst.row_senses)
    out << " " << (s == RowSense::kLe ? "LE" : s == RowSense::kGe ? "GE" : "EQ");
  out << "\n";
  out << "rhs";
  for (double b : inst.rhs) out << " " << format_real(b);
  out << "\n";
  out << "lower";
  for (double l : inst.lower_bounds) out << " " << format_real(l);
  out << "\n";
  out << "upper";
  for (double u : inst.upper_bounds) out << " " << format_real(u);
  out << "\n";
  out << "integer";
  for (bool f : inst.is_integer) out << " " << (f ? 1 : 0);
  out << "\n";
  out << "matrix " << inst.constraint_matrix.size() << "\n";
  for (const MatrixEntry& e : inst.constraint_matrix)
    out << e.row << " " << e.col << " " << format_real(e.value) << "\n";
  out << "end\n";
  return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

}  // namespace

MilpInstance parse_instance(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw Error("MALFORMED_LINE", what);
    return split_ws(line);
  };
  auto head = next("header");
  if (head.size() != 2 || head[0] != "tgbranch-instance" || head[1] != "1")
    throw Error("MALFORMED_LINE", "header");
  MilpInstance inst;
  auto name = next("name");
  if (name.empty() || name[0] != "name") throw Error("MALFORMED_LINE", "name");
  if (name.size() > 1) inst.name = name[1];
  auto vars = next("vars");
  inst.num_vars = std::stoi(vars.at(1));
  auto cons = next("cons");
  inst.num_cons = std::stoi(cons.at(1));

  auto reals_line = [&](const char* key) {
    auto toks = next(key);
    if (toks.empty() || toks[0] != key) throw Error("MALFORMED_LINE", key);
    std::vector<double> out;
    for (std::size_t i = 1; i < toks.size(); ++i)
      out.push_back(parse_real(toks[i]));
    return out;
  };
  inst.objective = reals_line("objective");
  auto senses = next("senses");
  for (std::size_t i = 1; i < senses.size(); ++i) {
    if (senses[i] == "LE")
      inst.row_senses.push_back(RowSense::kLe);
    else if (senses[i] == "GE")
      inst.row_senses.push_back(RowSense::kGe);
    else if (senses[i] == "EQ")
      inst.row_senses.push_back(RowSense::kEq);
    else
      throw Error("MALFORMED_LINE", "sense " + senses[i]);
  }
  inst.rhs = reals_line("rhs");
  inst.lower_bounds = reals_line("lower");
  inst.upper_bounds = reals_line("upper");
  auto ints = next("integer");
  for (std::size_t i = 1; i < ints.size(); ++i)
    inst.is_integer.push_back(ints[i] == "1");
  auto mat = next("matrix");
  std::size_t nnz = std::stoul(mat.at(1));
  for (std::size_t k = 0; k < nnz; ++k) {
    auto toks = next("matrix entry");
    if (toks.size() != 3) throw Error("MALFORMED_LINE", "matrix entry");
    inst.constraint_matrix.push_back(
        {std::stoi(toks[0]), std::stoi(toks[1]), parse_real(toks[2])});
  }
  auto tail = next("end");
  if (tail.empty() || tail[0] != "end") throw Error("MALFORMED_LINE", "end");
  return inst;
}

ValidationResult validate_instance(const MilpInstance& inst) {
  ValidationResult res;
  auto fail = [&](const std::string& code, const std::string& detail) {
    res.errors.push_back(code + "(" + detail + ")");
  };

  if (static_cast<int>(inst.objective.size()) != inst.num_vars ||
      static_cast<int>(inst.lower_bounds.size()) != inst.num_vars ||
      static_cast<int>(inst.upper_bounds.size()) != inst.num_vars ||
      static_cast<int>(inst.is_integer.size()) != inst.num_vars ||
      static_cast<int>(inst.row_senses.size()) != inst.num_cons ||
      static_cast<int>(inst.rhs.size()) != inst.num_cons) {
    fail("SHAPE_MISMATCH", inst.name);
    return res;
  }

  std::set<std::pair<int, int>> seen;
  std::vector<bool> col_used(inst.num_vars, false);
  for (const MatrixEntry& e : inst.constraint_matrix) {
    if (e.row < 0 || e.row >= inst.num_cons || e.col < 0 ||
        e.col >= inst.num_vars) {
      fail("INDEX_OUT_OF_RANGE",
           std::to_string(e.row) + "," + std::to_string(e.col));
      continue;
    }
    if (!seen.insert({e.row, e.col}).second)
      fail("DUPLICATE_ENTRY",
           std::to_string(e.row) + "," + std::to_string(e.col));
    col_used[e.col] = true;
  }
  for (int j = 0; j < inst.num_vars; ++j) {
    if (inst.lower_bounds[j] > inst.upper_bounds[j])
      fail("CROSSING_BOUNDS", std::to_string(j));
    if (!std::isfinite(inst.objective[j]))
      fail("INFINITE_OBJECTIVE", std::to_string(j));
    if (!col_used[j] && inst.num_cons > 0)
      fail("EMPTY_COLUMN", std::to_string(j));
  }
  for (int i = 0; i < inst.num_cons; ++i)
    if (!std::isfinite(inst.rhs[i])) fail("INFINITE_RHS", std::to_string(i));

  if (!res.errors.empty()) return res;

  // Normalize: GE -> -a x <= -b, EQ -> (a x <= b, -a x <= -b).
  MilpInstance norm = inst;
  norm.row_senses.clear();
  norm.rhs.clear();
  norm.constraint_matrix.clear();
  std::vector<std::vector<MatrixEntry>> by_row(inst.num_cons);
  for (const MatrixEntry& e : inst.constraint_matrix) by_row[e.row].push_back(e);
  int out_row = 0;
  auto emit = [&](const std::vector<MatrixEntry>& row, double rhs, double sign) {
    for (const MatrixEntry& e : row)
      norm.constraint_matrix.push_back({out_row, e.col, sign * e.value});
    norm.rhs.push_back(sign * rhs);
    norm.row_senses.push_back(RowSense::kLe);
    ++out_row;
  };
  for (int i = 0; i < inst.num_cons; ++i) {
    switch (inst.row_senses[i]) {
      case RowSense::kLe:
        emit(by_row[i], inst.rhs[i], 1.0);
        break;
      case RowSense::kGe:
        emit(by_row[i], inst.rhs[i], -1.0);
        break;
      case RowSense::kEq:
        emit(by_row[i], inst.rhs[i], 1.0);
        emit(by_row[i], inst.rhs[i], -1.0);
        break;
    }
  }
  norm.num_cons = out_row;
  std::sort(norm.constraint_matrix.begin(), norm.constraint_matrix.end(),
            [](const MatrixEntry& a, const MatrixEntry& b) {
              return std::tie(a.row, a.col) < std::tie(b.row, b.col);
            });
  res.normalized = std::move(norm);
  return res;
}

}  // namespace tgb
