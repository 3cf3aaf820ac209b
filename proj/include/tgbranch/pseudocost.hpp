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

#ifndef TGBRANCH_PSEUDOCOST_HPP_
#define TGBRANCH_PSEUDOCOST_HPP_

#include <cstdint>
#include <vector>

namespace tgb {

// Running per-unit objective gains observed when branching each integer
// variable up / down.  Means fall back to the global mean, then to 1.0,
// when a side has no observations yet.
class PseudocostTable {
 public:
  PseudocostTable() = default;
  explicit PseudocostTable(int num_vars) : entries_(num_vars) {}

  void add_up(int var, double gain) {
    entries_[var].up_sum += gain;
    entries_[var].up_count += 1;
  }
  void add_down(int var, double gain) {
    entries_[var].down_sum += gain;
    entries_[var].down_count += 1;
  }

  int up_count(int var) const { return entries_[var].up_count; }
  int down_count(int var) const { return entries_[var].down_count; }

  double global_up_mean() const {
    double sum = 0;
    std::int64_t cnt = 0;
    for (const Entry& e : entries_) { sum += e.up_sum; cnt += e.up_count; }
    return cnt > 0 ? sum / static_cast<double>(cnt) : 1.0;
  }
  double global_down_mean() const {
    double sum = 0;
    std::int64_t cnt = 0;
    for (const Entry& e : entries_) { sum += e.down_sum; cnt += e.down_count; }
    return cnt > 0 ? sum / static_cast<double>(cnt) : 1.0;
  }

  double up_mean(int var) const {
    const Entry& e = entries_[var];
    return e.up_count > 0 ? e.up_sum / e.up_count : global_up_mean();
  }
  double down_mean(int var) const {
    const Entry& e = entries_[var];
    return e.down_count > 0 ? e.down_sum / e.down_count : global_down_mean();
  }

  int size() const { return static_cast<int>(entries_.size()); }

 private:
  struct Entry {
    double up_sum = 0.0;
    double down_sum = 0.0;
    int up_count = 0;
    int down_count = 0;
  };
  std::vector<Entry> entries_;
};

}  // namespace tgb

#endif  // TGBRANCH_PSEUDOCOST_HPP_
