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

#ifndef TGBRANCH_ERROR_HPP_
#define TGBRANCH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tgb {

// Runtime error carrying a stable machine-readable code, e.g.
// "UNSUPPORTED_SECTION" with detail "RANGES".  what() renders as
// CODE(detail).
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail = "")
      : std::runtime_error(detail.empty() ? code : code + "(" + detail + ")"),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  const std::string& code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

}  // namespace tgb

#endif  // TGBRANCH_ERROR_HPP_
