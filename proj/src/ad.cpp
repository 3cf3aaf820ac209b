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

#include "tgbranch/ad.hpp"

#include <cmath>
#include <limits>

namespace tgb {
namespace ad {

namespace {
constexpr double kLnEps = 1e-5;  // layer-norm variance epsilon
}

int Tape::push(Eigen::MatrixXd value, std::function<void()> back) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  n.val = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(const Eigen::MatrixXd& value) { return push(value, {}); }

void Tape::backward(int id) {
  if (nodes_[id].val.size() != 1) throw Error("BACKWARD_NON_SCALAR");
  nodes_[id].grad(0, 0) = 1.0;
  for (int i = id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back();
}

int Tape::add(int a, int b) {
  int out = push(nodes_[a].val + nodes_[b].val, {});
  nodes_[out].back = [this, a, b, out]() {
    nodes_[a].grad += nodes_[out].grad;
    nodes_[b].grad += nodes_[out].grad;
  };
  return out;
}

int Tape::sub(int a, int b) {
  int out = push(nodes_[a].val - nodes_[b].val, {});
  nodes_[out].back = [this, a, b, out]() {
    nodes_[a].grad += nodes_[out].grad;
    nodes_[b].grad -= nodes_[out].grad;
  };
  return out;
}

int Tape::mul(int a, int b) {
  int out = push(nodes_[a].val.cwiseProduct(nodes_[b].val), {});
  nodes_[out].back = [this, a, b, out]() {
    nodes_[a].grad += nodes_[out].grad.cwiseProduct(nodes_[b].val);
    nodes_[b].grad += nodes_[out].grad.cwiseProduct(nodes_[a].val);
  };
  return out;
}

int Tape::matmul(int a, int b) {
  int out = push(nodes_[a].val * nodes_[b].val, {});
  nodes_[out].back = [this, a, b, out]() {
    nodes_[a].grad += nodes_[out].grad * nodes_[b].val.transpose();
    nodes_[b].grad += nodes_[a].val.transpose() * nodes_[out].grad;
  };
  return out;
}

int Tape::transpose(int a) {
  int out = push(nodes_[a].val.transpose(), {});
  nodes_[out].back = [this, a, out]() {
    nodes_[a].grad += nodes_[out].grad.transpose();
  };
  return out;
}

int Tape::scale(int a, double s) {
  int out = push(nodes_[a].val * s, {});
  nodes_[out].back = [this, a, out, s]() {
    nodes_[a].grad += nodes_[out].grad * s;
  };
  return out;
}

int Tape::add_scalar(int a, double s) {
  int out = push(nodes_[a].val.array() + s, {});
  nodes_[out].back = [this, a, out]() { nodes_[a].grad += nodes_[out].grad; };
  return out;
}

int Tape::add_rowvec(int a, int b) {
  Eigen::MatrixXd v = nodes_[a].val;
  v.rowwise() += nodes_[b].val.row(0);
  int out = push(std::move(v), {});
  nodes_[out].back = [this, a, b, out]() {
    nodes_[a].grad += nodes_[out].grad;
    nodes_[b].grad.row(0) += nodes_[out].grad.colwise().sum();
  };
  return out;
}

int Tape::mul_const(int a, const Eigen::MatrixXd& m) {
  int out = push(nodes_[a].val.cwiseProduct(m), {});
  nodes_[out].back = [this, a, out, m]() {
    nodes_[a].grad += nodes_[out].grad.cwiseProduct(m);
  };
  return out;
}

int Tape::relu(int a) {
  int out = push(nodes_[a].val.cwiseMax(0.0), {});
  nodes_[out].back = [this, a, out]() {
    nodes_[a].grad +=
        nodes_[out].grad.cwiseProduct((nodes_[a].val.array() > 0.0)
                                          .cast<double>()
                                          .matrix());
  };
  return out;
}

int Tape::sigmoid(int a) {
  Eigen::MatrixXd s =
      (1.0 / (1.0 + (-nodes_[a].val.array()).exp())).matrix();
  int out = push(s, {});
  nodes_[out].back = [this, a, out]() {
    const Eigen::ArrayXXd sv = nodes_[out].val.array();
    nodes_[a].grad +=
        (nodes_[out].grad.array() * sv * (1.0 - sv)).matrix();
  };
  return out;
}

int Tape::tanh_op(int a) {
  int out = push(nodes_[a].val.array().tanh().matrix(), {});
  nodes_[out].back = [this, a, out]() {
    const Eigen::ArrayXXd tv = nodes_[out].val.array();
    nodes_[a].grad += (nodes_[out].grad.array() * (1.0 - tv * tv)).matrix();
  };
  return out;
}

int Tape::exp_op(int a) {
  int out = push(nodes_[a].val.array().exp().matrix(), {});
  nodes_[out].back = [this, a, out]() {
    nodes_[a].grad +=
        nodes_[out].grad.cwiseProduct(nodes_[out].val);
  };
  return out;
}

int Tape::clamp(int a, double lo, double hi) {
  int out = push(nodes_[a].val.cwiseMax(lo).cwiseMin(hi), {});
  nodes_[out].back = [this, a, out, lo, hi]() {
    const Eigen::ArrayXXd x = nodes_[a].val.array();
    Eigen::ArrayXXd inside =
        ((x >= lo) && (x <= hi)).cast<double>();
    nodes_[a].grad += (nodes_[out].grad.array() * inside).matrix();
  };
  return out;
}

int Tape::min_op(int a, int b) {
  int out = push(nodes_[a].val.cwiseMin(nodes_[b].val), {});
  nodes_[out].back = [this, a, b, out]() {
    Eigen::ArrayXXd take_a =
        (nodes_[a].val.array() <= nodes_[b].val.array()).cast<double>();
    nodes_[a].grad += (nodes_[out].grad.array() * take_a).matrix();
    nodes_[b].grad += (nodes_[out].grad.array() * (1.0 - take_a)).matrix();
  };
  return out;
}

int Tape::slice_cols(int a, int start, int len) {
  int out = push(nodes_[a].val.middleCols(start, len), {});
  nodes_[out].back = [this, a, out, start, len]() {
    nodes_[a].grad.middleCols(start, len) += nodes_[out].grad;
  };
  return out;
}

int Tape::concat_cols(const std::vector<int>& parts) {
  Eigen::Index rows = nodes_[parts.front()].val.rows();
  Eigen::Index cols = 0;
  for (int p : parts) cols += nodes_[p].val.cols();
  Eigen::MatrixXd v(rows, cols);
  Eigen::Index at = 0;
  for (int p : parts) {
    v.middleCols(at, nodes_[p].val.cols()) = nodes_[p].val;
    at += nodes_[p].val.cols();
  }
  int out = push(std::move(v), {});
  std::vector<int> ps = parts;
  nodes_[out].back = [this, ps, out]() {
    Eigen::Index at2 = 0;
    for (int p : ps) {
      nodes_[p].grad += nodes_[out].grad.middleCols(at2, nodes_[p].val.cols());
      at2 += nodes_[p].val.cols();
    }
  };
  return out;
}

int Tape::select(int a, int row, int col) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = nodes_[a].val(row, col);
  int out = push(std::move(v), {});
  nodes_[out].back = [this, a, out, row, col]() {
    nodes_[a].grad(row, col) += nodes_[out].grad(0, 0);
  };
  return out;
}

int Tape::sum_all(int a) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = nodes_[a].val.sum();
  int out = push(std::move(v), {});
  nodes_[out].back = [this, a, out]() {
    nodes_[a].grad.array() += nodes_[out].grad(0, 0);
  };
  return out;
}

int Tape::layer_norm(int a, int gain, int bias) {
  const Eigen::MatrixXd& x = nodes_[a].val;
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd xhat(n, d), y(n, d);
  Eigen::VectorXd inv_sigma(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    double is = 1.0 / std::sqrt(var + kLnEps);
    inv_sigma(r) = is;
    xhat.row(r) = (x.row(r).array() - mu) * is;
    y.row(r) = xhat.row(r).cwiseProduct(nodes_[gain].val.row(0)) +
               nodes_[bias].val.row(0);
  }
  int out = push(std::move(y), {});
  nodes_[out].back = [this, a, gain, bias, out, xhat, inv_sigma, d]() {
    const Eigen::MatrixXd& dy = nodes_[out].grad;
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      Eigen::RowVectorXd dxhat =
          dy.row(r).cwiseProduct(nodes_[gain].val.row(0));
      double m1 = dxhat.mean();
      double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
      nodes_[a].grad.row(r) +=
          inv_sigma(r) *
          (dxhat.array() - m1 - xhat.row(r).array() * m2).matrix();
      nodes_[gain].grad.row(0) += dy.row(r).cwiseProduct(xhat.row(r));
      nodes_[bias].grad.row(0) += dy.row(r);
    }
    (void)d;
  };
  return out;
}

int Tape::softmax_rows(int a, const std::vector<bool>& pad_mask) {
  const Eigen::MatrixXd& x = nodes_[a].val;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (!pad_mask[c]) mx = std::max(mx, x(r, c));
    double z = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (pad_mask[c]) continue;
      p(r, c) = std::exp(x(r, c) - mx);
      z += p(r, c);
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (!pad_mask[c]) p(r, c) /= z;
  }
  int out = push(std::move(p), {});
  nodes_[out].back = [this, a, out]() {
    const Eigen::MatrixXd& pv = nodes_[out].val;
    const Eigen::MatrixXd& dp = nodes_[out].grad;
    for (Eigen::Index r = 0; r < pv.rows(); ++r) {
      double dot = dp.row(r).cwiseProduct(pv.row(r)).sum();
      nodes_[a].grad.row(r) +=
          pv.row(r).cwiseProduct(dp.row(r).array().matrix() -
                                 Eigen::RowVectorXd::Constant(pv.cols(), dot));
    }
  };
  return out;
}

int Tape::log_softmax_rows(int a, const std::vector<bool>& pad_mask) {
  const Eigen::MatrixXd& x = nodes_[a].val;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (!pad_mask[c]) mx = std::max(mx, x(r, c));
    double z = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (!pad_mask[c]) z += std::exp(x(r, c) - mx);
    double lse = mx + std::log(z);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (pad_mask[c]) continue;
      y(r, c) = x(r, c) - lse;
      p(r, c) = std::exp(y(r, c));
    }
  }
  int out = push(std::move(y), {});
  std::vector<bool> mask = pad_mask;
  nodes_[out].back = [this, a, out, p, mask]() {
    const Eigen::MatrixXd& dy = nodes_[out].grad;
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < dy.cols(); ++c)
        if (!mask[c]) s += dy(r, c);
      for (Eigen::Index c = 0; c < dy.cols(); ++c)
        if (!mask[c]) nodes_[a].grad(r, c) += dy(r, c) - p(r, c) * s;
    }
  };
  return out;
}

int Tape::masked_mean_rows(int a, const std::vector<bool>& pad_mask) {
  const Eigen::MatrixXd& x = nodes_[a].val;
  double cnt = 0.0;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (pad_mask[r]) continue;
    sum += x.row(r);
    cnt += 1.0;
  }
  if (cnt == 0.0) throw Error("EMPTY_MASK");
  Eigen::MatrixXd v = sum / cnt;
  int out = push(std::move(v), {});
  std::vector<bool> mask = pad_mask;
  nodes_[out].back = [this, a, out, mask, cnt]() {
    for (Eigen::Index r = 0; r < nodes_[a].val.rows(); ++r)
      if (!mask[r]) nodes_[a].grad.row(r) += nodes_[out].grad.row(0) / cnt;
  };
  return out;
}

}  // namespace ad
}  // namespace tgb
