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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "tgbranch/ad.hpp"

namespace {

using tgb::ad::Tape;

// Builds the graph over fresh leaf nodes and returns the scalar output id.
using GraphFn = std::function<int(Tape&, const std::vector<int>&)>;

double eval(const GraphFn& fn, const std::vector<Eigen::MatrixXd>& inputs) {
  Tape tape;
  std::vector<int> ids;
  for (const Eigen::MatrixXd& m : inputs) ids.push_back(tape.input(m));
  return tape.value(fn(tape, ids))(0, 0);
}

// Central-difference comparison on every entry of every input.
void check_gradients(const GraphFn& fn, std::vector<Eigen::MatrixXd> inputs,
                     double h = 1e-6, double tol = 1e-5) {
  Tape tape;
  std::vector<int> ids;
  for (const Eigen::MatrixXd& m : inputs) ids.push_back(tape.input(m));
  int out = fn(tape, ids);
  tape.backward(out);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index r = 0; r < inputs[i].rows(); ++r) {
      for (Eigen::Index c = 0; c < inputs[i].cols(); ++c) {
        std::vector<Eigen::MatrixXd> plus = inputs, minus = inputs;
        plus[i](r, c) += h;
        minus[i](r, c) -= h;
        double fd = (eval(fn, plus) - eval(fn, minus)) / (2.0 * h);
        double an = tape.grad(ids[i])(r, c);
        INFO("input ", i, " entry (", r, ",", c, ")");
        CHECK(std::fabs(an - fd) / std::max(1.0, std::fabs(an)) < tol);
      }
    }
  }
}

Eigen::MatrixXd randm(std::mt19937_64& rng, int r, int c, double s = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = s * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  return m;
}

}  // namespace

TEST_CASE("linear algebra ops match finite differences") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    GraphFn fn = [](Tape& t, const std::vector<int>& in) {
      int z = t.matmul(in[0], in[1]);          // 3x4 * 4x2
      z = t.add_rowvec(z, in[2]);              // + 1x2
      z = t.relu(z);
      z = t.mul(z, t.add(z, z));               // reuse, elementwise
      int w = t.transpose(t.scale(z, 0.5));
      return t.sum_all(w);
    };
    check_gradients(fn, {randm(rng, 3, 4), randm(rng, 4, 2), randm(rng, 1, 2)});
  }
}

TEST_CASE("nonlinearities match finite differences") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    GraphFn fn = [](Tape& t, const std::vector<int>& in) {
      int a = t.sigmoid(in[0]);
      int b = t.tanh_op(in[0]);
      int c = t.exp_op(t.scale(in[0], 0.3));
      int d = t.add(t.mul(a, b), c);
      d = t.add_scalar(d, 0.1);
      return t.sum_all(d);
    };
    check_gradients(fn, {randm(rng, 2, 5)});
  }
}

TEST_CASE("clamp and min carry subgradients") {
  std::mt19937_64 rng(3);
  // Keep entries away from the kink so finite differences are clean.
  Eigen::MatrixXd a = randm(rng, 2, 3, 2.0);
  Eigen::MatrixXd b = randm(rng, 2, 3, 2.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::fabs(a.data()[i] - b.data()[i]) < 0.05) a.data()[i] += 0.2;
    if (std::fabs(std::fabs(a.data()[i]) - 1.0) < 0.05) a.data()[i] *= 1.2;
  }
  GraphFn fn = [](Tape& t, const std::vector<int>& in) {
    int c = t.clamp(in[0], -1.0, 1.0);
    int m = t.min_op(c, in[1]);
    return t.sum_all(t.mul(m, m));
  };
  check_gradients(fn, {a, b});
}

TEST_CASE("shape utilities match finite differences") {
  std::mt19937_64 rng(4);
  GraphFn fn = [](Tape& t, const std::vector<int>& in) {
    int left = t.slice_cols(in[0], 0, 2);
    int right = t.slice_cols(in[0], 2, 3);
    int cat = t.concat_cols({right, left});
    int picked = t.select(cat, 1, 3);
    return t.add(picked, t.sum_all(t.mul(cat, cat)));
  };
  check_gradients(fn, {randm(rng, 3, 5)});
}

TEST_CASE("layer norm matches finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    GraphFn fn = [](Tape& t, const std::vector<int>& in) {
      int y = t.layer_norm(in[0], in[1], in[2]);
      return t.sum_all(t.mul(y, y));
    };
    check_gradients(
        fn, {randm(rng, 4, 6, 2.0), randm(rng, 1, 6), randm(rng, 1, 6)},
        1e-6, 1e-4);
  }
}

TEST_CASE("masked softmax: padded probabilities are exactly zero") {
  Tape t;
  Eigen::MatrixXd logits(2, 4);
  logits << 1.0, 2.0, 3.0, 100.0, 0.0, 0.0, 0.0, 100.0;
  std::vector<bool> mask = {false, false, false, true};
  int p = t.softmax_rows(t.input(logits), mask);
  CHECK(t.value(p)(0, 3) == 0.0);
  CHECK(t.value(p)(1, 3) == 0.0);
  CHECK(t.value(p).row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.value(p)(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("masked softmax and log-softmax match finite differences") {
  std::mt19937_64 rng(6);
  std::vector<bool> mask = {false, false, true, false, true};
  for (int trial = 0; trial < 5; ++trial) {
    GraphFn fn = [&mask](Tape& t, const std::vector<int>& in) {
      int p = t.softmax_rows(in[0], mask);
      int lp = t.log_softmax_rows(in[0], mask);
      int ent = t.scale(t.sum_all(t.mul(p, lp)), -1.0);  // entropy
      int picked = t.select(lp, 0, 1);
      return t.add(ent, picked);
    };
    check_gradients(fn, {randm(rng, 2, 5, 2.0)});
  }
}

TEST_CASE("uniform logits give the closed-form log-prob and entropy") {
  Tape t;
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(1, 4);
  std::vector<bool> mask(4, false);
  int p = t.softmax_rows(t.input(logits), mask);
  int lp = t.log_softmax_rows(t.input(logits), mask);
  double ln4 = std::log(4.0);
  for (int c = 0; c < 4; ++c) {
    CHECK(t.value(p)(0, c) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t.value(lp)(0, c) == doctest::Approx(-ln4).epsilon(1e-12));
  }
}

TEST_CASE("masked mean over rows matches finite differences") {
  std::mt19937_64 rng(7);
  std::vector<bool> mask = {false, true, false, true};
  GraphFn fn = [&mask](Tape& t, const std::vector<int>& in) {
    int m = t.masked_mean_rows(in[0], mask);
    return t.sum_all(t.mul(m, m));
  };
  check_gradients(fn, {randm(rng, 4, 3)});
  Tape t;
  Eigen::MatrixXd x(4, 3);
  x.setOnes();
  x.row(0) *= 3.0;
  int m = t.masked_mean_rows(t.input(x), mask);
  CHECK(t.value(m)(0, 0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(t.masked_mean_rows(t.input(x), {true, true, true, true}),
                  tgb::Error);
}

TEST_CASE("backward rejects non-scalar outputs") {
  Tape t;
  int a = t.input(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(t.backward(a), tgb::Error);
}

TEST_CASE("gradient accumulation over twenty random composite graphs") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    GraphFn fn = [](Tape& t, const std::vector<int>& in) {
      int h = t.tanh_op(t.add_rowvec(t.matmul(in[0], in[1]), in[2]));
      int g = t.sigmoid(t.matmul(h, t.transpose(in[1])));
      int mix = t.mul(g, t.add(in[0], in[0]));
      return t.sum_all(mix);
    };
    check_gradients(fn,
                    {randm(rng, 2, 3), randm(rng, 3, 2), randm(rng, 1, 2)});
  }
}
