// Copyright 2026  NoiseVC contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "helpers.hpp"
#include "noisevc/layers.hpp"

using namespace noisevc;
using testutil::numeric_grad;
using testutil::rel_err;

namespace {

// Weighted sum of outputs as the test objective; its gradient is `w`.
template <class Fwd>
void check_input_grad(Matrix &x, const Matrix &w, Fwd fwd, const Matrix &analytic, int probes,
                      Rng &rng) {
  for (int i = 0; i < probes; ++i) {
    const auto r = static_cast<Eigen::Index>(uniform_index(rng, x.rows()));
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, x.cols()));
    const double num = numeric_grad(x, r, c, [&] { return fwd().cwiseProduct(w).sum(); });
    CHECK(rel_err(num, analytic(r, c)) < 1e-5);
  }
}

void check_param_grad(Param &p, const Matrix &w, const std::function<Matrix()> &fwd, int probes,
                      Rng &rng) {
  for (int i = 0; i < probes; ++i) {
    const auto r = static_cast<Eigen::Index>(uniform_index(rng, p.value.rows()));
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, p.value.cols()));
    const double num = numeric_grad(p.value, r, c, [&] { return fwd().cwiseProduct(w).sum(); });
    CHECK(rel_err(num, p.grad(r, c)) < 1e-5);
  }
}

}  // namespace

TEST_CASE("conv1d matches a direct convolution and keeps length") {
  Rng rng(1);
  Conv1d conv("c", 3, 4, 5, rng);
  const Matrix x = normal_matrix(2 * 9, 3, 1.0, rng);
  const SeqBatch y = conv.forward(SeqBatch(x, 2, 9));
  CHECK(y.length == 9);
  CHECK(y.channels() == 4);
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < 9; ++t)
      for (int o = 0; o < 4; ++o) {
        double s = conv.bias().value(0, o);
        for (int j = 0; j < 5; ++j) {
          const int tt = t + j - 2;
          if (tt < 0 || tt >= 9) continue;
          for (int ci = 0; ci < 3; ++ci) s += x(b * 9 + tt, ci) * conv.weight().value(j * 3 + ci, o);
        }
        CHECK(y.data(b * 9 + t, o) == doctest::Approx(s).epsilon(1e-12));
      }
}

TEST_CASE("conv1d gradients") {
  Rng rng(2);
  Conv1d conv("c", 3, 4, 3, rng);
  Matrix x = normal_matrix(2 * 7, 3, 1.0, rng);
  const Matrix w = normal_matrix(2 * 7, 4, 1.0, rng);
  auto fwd = [&] { return conv.forward(SeqBatch(x, 2, 7)).data; };
  fwd();
  conv.weight().zero_grad();
  conv.bias().zero_grad();
  const Matrix gx = conv.backward(w);
  check_input_grad(x, w, fwd, gx, 10, rng);
  fwd();
  check_param_grad(conv.weight(), w, fwd, 10, rng);
  check_param_grad(conv.bias(), w, fwd, 4, rng);
}

TEST_CASE("leaky relu and relu gradients") {
  Rng rng(3);
  Matrix x = normal_matrix(10, 3, 1.0, rng);
  const Matrix w = normal_matrix(10, 3, 1.0, rng);
  LeakyRelu lr(0.2);
  auto f1 = [&] { return lr.forward(SeqBatch(x, 1, 10)).data; };
  f1();
  check_input_grad(x, w, f1, lr.backward(w), 10, rng);
  Relu r;
  auto f2 = [&] { return r.forward(SeqBatch(x, 1, 10)).data; };
  f2();
  check_input_grad(x, w, f2, r.backward(w), 10, rng);
}

TEST_CASE("batch norm: training statistics and gradients") {
  Rng rng(4);
  BatchNorm1d bn("bn", 3);
  Matrix x = normal_matrix(12, 3, 2.0, rng);
  x.col(1).array() += 5.0;
  const SeqBatch y = bn.forward(SeqBatch(x, 3, 4), true);
  CHECK(y.data.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);

  const Matrix w = normal_matrix(12, 3, 1.0, rng);
  std::vector<Param *> ps;
  bn.collect(ps);
  auto fwd = [&] { return bn.forward(SeqBatch(x, 3, 4), true).data; };
  fwd();
  for (Param *p : ps) p->zero_grad();
  const Matrix gx = bn.backward(w);
  check_input_grad(x, w, fwd, gx, 10, rng);
  fwd();
  check_param_grad(*ps[0], w, fwd, 3, rng);
  check_param_grad(*ps[1], w, fwd, 3, rng);
}

TEST_CASE("batch norm running statistics drive inference") {
  Rng rng(5);
  BatchNorm1d bn("bn", 2, 0.1);
  for (int i = 0; i < 200; ++i) {
    Matrix x = normal_matrix(64, 2, 3.0, rng);
    x.array() += 7.0;
    bn.forward(SeqBatch(x, 1, 64), true);
  }
  Matrix probe = Matrix::Constant(1, 2, 7.0);
  const SeqBatch y = bn.forward(SeqBatch(probe, 1, 1), false);
  CHECK(y.data.cwiseAbs().maxCoeff() < 0.2);
}

TEST_CASE("linear gradients and apply()") {
  Rng rng(6);
  Linear lin("l", 4, 3, rng);
  Matrix x = normal_matrix(5, 4, 1.0, rng);
  const Matrix w = normal_matrix(5, 3, 1.0, rng);
  auto fwd = [&] { return lin.forward(x); };
  CHECK((fwd() - lin.apply(x)).cwiseAbs().maxCoeff() == 0.0);
  fwd();
  lin.weight().zero_grad();
  lin.bias().zero_grad();
  const Matrix gx = lin.backward(w);
  check_input_grad(x, w, fwd, gx, 8, rng);
  fwd();
  check_param_grad(lin.weight(), w, fwd, 8, rng);
}

TEST_CASE("lstm gradients through time") {
  Rng rng(7);
  Lstm lstm("lstm", 3, 4, rng);
  Matrix x = normal_matrix(2 * 6, 3, 1.0, rng);
  const Matrix w = normal_matrix(2 * 6, 4, 1.0, rng);
  std::vector<Param *> ps;
  lstm.collect(ps);
  auto fwd = [&] { return lstm.forward(SeqBatch(x, 2, 6)).data; };
  fwd();
  for (Param *p : ps) p->zero_grad();
  const Matrix gx = lstm.backward(w);
  check_input_grad(x, w, fwd, gx, 12, rng);
  for (Param *p : ps) {
    fwd();
    check_param_grad(*p, w, fwd, 6, rng);
  }
}

TEST_CASE("lstm sequences are independent within a batch") {
  Rng rng(8);
  Lstm lstm("lstm", 2, 3, rng);
  const Matrix a = normal_matrix(5, 2, 1.0, rng), b = normal_matrix(5, 2, 1.0, rng);
  Matrix ab(10, 2);
  ab << a, b;
  const Matrix both = lstm.forward(SeqBatch(ab, 2, 5)).data;
  const Matrix only_b = lstm.forward(SeqBatch(b, 1, 5)).data;
  CHECK((both.bottomRows(5) - only_b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("time-major reorder round trips") {
  Rng rng(9);
  const Matrix x = normal_matrix(12, 2, 1.0, rng);
  const Matrix tm = to_time_major(x, 3, 4);
  CHECK(tm.row(1) == x.row(4));
  CHECK(to_batch_major(tm, 3, 4) == x);
}
