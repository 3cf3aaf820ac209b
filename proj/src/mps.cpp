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

// Free-format MPS reader covering the subset used by this project:
// NAME, ROWS, COLUMNS (with INTORG/INTEND markers), RHS, BOUNDS, ENDATA.
// Anything else (RANGES, SOS, OBJSENSE, ...) is rejected loudly.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tgbranch/milp.hpp"

namespace tgb {

namespace {

struct ColBounds {
  double lower = 0.0;
  double upper = kInf;
  bool lower_set = false;
  bool upper_set = false;
};

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

double number(const std::string& tok, int lineno) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
  }
  if (pos != tok.size())
    throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
  return v;
}

}  // namespace

MilpInstance parse_mps(const std::string& text) {
  MilpInstance inst;
  std::map<std::string, int> row_index;   // constraint rows only
  std::map<std::string, int> col_index;
  std::string obj_row;
  std::map<std::string, double> obj_coeffs;
  std::map<std::string, ColBounds> bounds;
  std::set<std::string> integer_cols;
  std::set<std::pair<std::string, std::string>> entries_seen;
  bool in_intorg = false;
  bool saw_endata = false;

  enum Section { kNone, kRows, kColumns, kRhs, kBounds };
  Section section = kNone;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    auto toks = tokens(line);
    if (toks.empty()) continue;

    bool is_header = !std::isspace(static_cast<unsigned char>(line[0]));
    if (is_header) {
      const std::string& kw = toks[0];
      if (kw == "NAME") {
        if (toks.size() > 1) inst.name = toks[1];
      } else if (kw == "ROWS") {
        section = kRows;
      } else if (kw == "COLUMNS") {
        section = kColumns;
      } else if (kw == "RHS") {
        section = kRhs;
      } else if (kw == "BOUNDS") {
        section = kBounds;
      } else if (kw == "ENDATA") {
        saw_endata = true;
        break;
      } else {
        throw Error("UNSUPPORTED_SECTION", kw);
      }
      continue;
    }

    switch (section) {
      case kNone:
        throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
      case kRows: {
        if (toks.size() != 2)
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        const std::string& type = toks[0];
        const std::string& name = toks[1];
        if (type == "N") {
          if (!obj_row.empty())
            throw Error("MALFORMED_LINE",
                        "second N row at line " + std::to_string(lineno));
          obj_row = name;
        } else if (type == "L" || type == "G" || type == "E") {
          if (row_index.count(name))
            throw Error("DUPLICATE_ENTRY", name);
          row_index[name] = inst.num_cons++;
          inst.row_senses.push_back(type == "L"   ? RowSense::kLe
                                    : type == "G" ? RowSense::kGe
                                                  : RowSense::kEq);
        } else {
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        }
        break;
      }
      case kColumns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'")
            in_intorg = true;
          else if (toks[2] == "'INTEND'")
            in_intorg = false;
          else
            throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
          break;
        }
        if (toks.size() != 3 && toks.size() != 5)
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        const std::string& col = toks[0];
        if (!col_index.count(col)) {
          col_index[col] = inst.num_vars++;
          if (in_intorg) integer_cols.insert(col);
        }
        for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
          const std::string& row = toks[k];
          double v = number(toks[k + 1], lineno);
          if (!entries_seen.insert({row, col}).second)
            throw Error("DUPLICATE_ENTRY", row + "," + col);
          if (row == obj_row) {
            obj_coeffs[col] = v;
          } else {
            auto it = row_index.find(row);
            if (it == row_index.end())
              throw Error("MALFORMED_LINE",
                          "unknown row at line " + std::to_string(lineno));
            inst.constraint_matrix.push_back({it->second, col_index[col], v});
          }
        }
        break;
      }
      case kRhs: {
        if (toks.size() != 3 && toks.size() != 5)
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
          const std::string& row = toks[k];
          double v = number(toks[k + 1], lineno);
          if (row == obj_row) continue;  // objective constant, ignored
          auto it = row_index.find(row);
          if (it == row_index.end())
            throw Error("MALFORMED_LINE",
                        "unknown row at line " + std::to_string(lineno));
          inst.rhs.resize(inst.num_cons, 0.0);
          inst.rhs[it->second] = v;
        }
        break;
      }
      case kBounds: {
        if (toks.size() != 3 && toks.size() != 4)
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        const std::string& key = toks[0];
        const std::string& col = toks[2];
        if (!col_index.count(col))
          throw Error("MALFORMED_LINE",
                      "unknown column at line " + std::to_string(lineno));
        ColBounds& cb = bounds[col];
        auto need_value = [&]() {
          if (toks.size() != 4)
            throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
          return number(toks[3], lineno);
        };
        if (key == "LO") {
          cb.lower = need_value();
          cb.lower_set = true;
        } else if (key == "UP") {
          cb.upper = need_value();
          cb.upper_set = true;
        } else if (key == "FX") {
          double v = need_value();
          cb.lower = cb.upper = v;
          cb.lower_set = cb.upper_set = true;
        } else if (key == "BV") {
          cb.lower = 0.0;
          cb.upper = 1.0;
          cb.lower_set = cb.upper_set = true;
          integer_cols.insert(col);
        } else if (key == "MI") {
          cb.lower = -kInf;
          cb.lower_set = true;
        } else if (key == "PL") {
          cb.upper = kInf;
          cb.upper_set = true;
        } else {
          throw Error("MALFORMED_LINE", "line " + std::to_string(lineno));
        }
        break;
      }
    }
  }
  if (!saw_endata) throw Error("MALFORMED_LINE", "missing ENDATA");

  inst.rhs.resize(inst.num_cons, 0.0);
  inst.objective.assign(inst.num_vars, 0.0);
  inst.lower_bounds.assign(inst.num_vars, 0.0);
  inst.upper_bounds.assign(inst.num_vars, kInf);
  inst.is_integer.assign(inst.num_vars, false);
  for (const auto& [col, j] : col_index) {
    if (auto it = obj_coeffs.find(col); it != obj_coeffs.end())
      inst.objective[j] = it->second;
    bool integral = integer_cols.count(col) > 0;
    inst.is_integer[j] = integral;
    auto bit = bounds.find(col);
    if (bit == bounds.end()) {
      // Defaults: continuous [0,+inf), marker-declared integers [0,1].
      inst.lower_bounds[j] = 0.0;
      inst.upper_bounds[j] = integral ? 1.0 : kInf;
    } else {
      inst.lower_bounds[j] = bit->second.lower_set ? bit->second.lower : 0.0;
      inst.upper_bounds[j] = bit->second.upper_set ? bit->second.upper : kInf;
    }
  }
  return inst;
}

}  // namespace tgb
