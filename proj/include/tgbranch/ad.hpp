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

#ifndef TGBRANCH_AD_HPP_
#define TGBRANCH_AD_HPP_

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tgbranch/error.hpp"

namespace tgb {
namespace ad {

// Reverse-mode tape over dense 64-bit matrices.  Scalars are 1x1, row
// vectors 1xd.  Node ids are indices into the tape; backward() walks the
// tape in reverse creation order, so graphs must be built forward-only.
class Tape {
 public:
  int input(const Eigen::MatrixXd& value);

  const Eigen::MatrixXd& value(int id) const { return nodes_[id].val; }
  const Eigen::MatrixXd& grad(int id) const { return nodes_[id].grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Seeds d(node)/d(node) = 1 (node must be 1x1) and accumulates gradients
  // into every node reachable backwards.
  void backward(int id);

  // Arithmetic.
  int add(int a, int b);                 // same shape
  int sub(int a, int b);                 // same shape
  int mul(int a, int b);                 // elementwise, same shape
  int matmul(int a, int b);
  int transpose(int a);
  int scale(int a, double s);
  int add_scalar(int a, double s);
  int add_rowvec(int a, int b);          // a: n x d, b: 1 x d broadcast
  int mul_const(int a, const Eigen::MatrixXd& m);  // elementwise constant

  // Elementwise nonlinearities.
  int relu(int a);
  int sigmoid(int a);
  int tanh_op(int a);
  int exp_op(int a);
  int clamp(int a, double lo, double hi);  // zero gradient outside [lo, hi]
  int min_op(int a, int b);                // picks a's gradient on ties

  // Shape utilities.
  int slice_cols(int a, int start, int len);
  int concat_cols(const std::vector<int>& parts);
  int select(int a, int row, int col);     // 1x1 view of one entry
  int sum_all(int a);                      // 1x1

  // Row-wise layer norm with learned gain/bias (both 1 x d), eps 1e-5.
  int layer_norm(int a, int gain, int bias);

  // Row-wise masked softmax / log-softmax over an n x L matrix; mask true =
  // padded column.  Padded probabilities are exactly 0 (log set to 0).
  int softmax_rows(int a, const std::vector<bool>& pad_mask);
  int log_softmax_rows(int a, const std::vector<bool>& pad_mask);

  // Mean over unmasked rows of an n x d matrix -> 1 x d; mask true = padded.
  int masked_mean_rows(int a, const std::vector<bool>& pad_mask);

 private:
  struct Node {
    Eigen::MatrixXd val;
    Eigen::MatrixXd grad;
    std::function<void()> back;  // empty for leaves
  };

  int push(Eigen::MatrixXd value, std::function<void()> back);

  std::vector<Node> nodes_;
};

}  // namespace ad
}  // namespace tgb

#endif  // TGBRANCH_AD_HPP_
