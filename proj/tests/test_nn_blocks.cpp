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

#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "noisevc/error.hpp"
#include "noisevc/nn_blocks.hpp"

using namespace noisevc;
using testutil::numeric_grad;
using testutil::rel_err;

namespace {

std::vector<int> brute_force_nn(const Matrix &e, const Matrix &codes) {
  std::vector<int> out;
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    int best = 0;
    double bd = INFINITY;
    for (Eigen::Index v = 0; v < codes.rows(); ++v) {
      double d = 0;
      for (Eigen::Index j = 0; j < e.cols(); ++j) d += (e(t, j) - codes(v, j)) * (e(t, j) - codes(v, j));
      if (d < bd) {
        bd = d;
        best = static_cast<int>(v);
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_CASE("quantize agrees with exhaustive search") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(uniform_index(rng, 64));
    const int V = 1 + static_cast<int>(uniform_index(rng, 128));
    const int D = 1 + static_cast<int>(uniform_index(rng, 32));
    const Codebook book(normal_matrix(V, D, 1.0, rng));
    const Matrix e = normal_matrix(T, D, 1.0, rng);
    const ContentEmbedding q = quantize(e, book);
    CHECK(q.indices == brute_force_nn(e, book.codes.value));
    for (int t = 0; t < T; ++t) CHECK(q.quantized.row(t) == book.codes.value.row(q.indices[t]));
    CHECK(q.straight_through == q.quantized);
  }
}

TEST_CASE("ties resolve to the lowest index") {
  Matrix codes(4, 2);
  codes << 1, 0, -1, 0, 0, 1, 1, 0;  // rows 0 and 3 coincide
  const Codebook book(codes);
  Matrix e(3, 2);
  e << 0, 0,  // equidistant from all four
      1, 0,   // exact hit on rows 0 and 3
      0, -1;  // equidistant from 0 and 1 (and 3)
  const ContentEmbedding q = quantize(e, book);
  CHECK(q.indices == std::vector<int>{0, 0, 0});
}

TEST_CASE("quantize rejects width mismatch") {
  const Codebook book(Matrix::Zero(3, 4));
  CHECK_THROWS(quantize(Matrix::Zero(2, 5), book));
}

TEST_CASE("vq loss values are mean reduced") {
  Rng rng(12);
  const Codebook book(normal_matrix(8, 3, 1.0, rng));
  const Matrix e = normal_matrix(5, 3, 1.0, rng);
  const ContentEmbedding q = quantize(e, book);
  const Matrix x = normal_matrix(5, 4, 1.0, rng), xh = normal_matrix(5, 4, 1.0, rng);
  const LossBundle l = vq_loss(x, xh, e, q, 0.25);
  double rec = 0, cb = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) rec += std::abs(x(i, j) - xh(i, j)) / 20 + std::pow(x(i, j) - xh(i, j), 2) / 20;
  for (int i = 0; i < 5; ++i) cb += (e.row(i) - q.quantized.row(i)).squaredNorm() / 15;  // mean over all elements
  CHECK(l.reconstruction == doctest::Approx(rec).epsilon(1e-12));
  CHECK(l.codebook_term == doctest::Approx(cb).epsilon(1e-12));
  CHECK(l.commitment_term == doctest::Approx(0.25 * cb).epsilon(1e-12));
  CHECK(l.total == doctest::Approx(rec + 1.25 * cb).epsilon(1e-12));
}

TEST_CASE("stop-gradient routing and finite differences") {
  Rng rng(13);
  Codebook book(normal_matrix(16, 4, 1.0, rng));
  Matrix e = normal_matrix(10, 4, 1.0, rng);
  const ContentEmbedding q = quantize(e, book);
  const Matrix x = normal_matrix(10, 3, 1.0, rng), xh = normal_matrix(10, 3, 1.0, rng);

  const VqGradients only_cb = vq_loss_backward(x, xh, e, q, book, 0.25, {false, true, false, false});
  const VqGradients only_commit = vq_loss_backward(x, xh, e, q, book, 0.25, {false, false, true, false});
  CHECK(only_cb.encoded.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(only_commit.codes.cwiseAbs().maxCoeff() < 1e-8);

  // With indices held fixed, the codebook term's derivative in the codes and
  // the commitment term's derivative in E are ordinary gradients.
  auto with_fixed = [&](const Matrix &enc, const Matrix &codes) {
    ContentEmbedding qq = q;
    for (int t = 0; t < 10; ++t) qq.quantized.row(t) = codes.row(qq.indices[t]);
    return vq_loss(x, xh, enc, qq, 0.25);
  };
  Matrix codes = book.codes.value;
  for (int i = 0; i < 5; ++i) {
    const int v = q.indices[uniform_index(rng, 10)];
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, 4));
    const double num = numeric_grad(codes, v, j, [&] { return with_fixed(e, codes).codebook_term; });
    CHECK(rel_err(num, only_cb.codes(v, j)) < 1e-4);
  }
  for (int i = 0; i < 5; ++i) {
    const auto t = static_cast<Eigen::Index>(uniform_index(rng, 10));
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, 4));
    const double num = numeric_grad(e, t, j, [&] { return with_fixed(e, codes).commitment_term; });
    CHECK(rel_err(num, only_commit.encoded(t, j)) < 1e-4);
  }
  Matrix xh2 = xh;
  const VqGradients rec = vq_loss_backward(x, xh, e, q, book, 0.25, {true, false, false, false});
  for (int i = 0; i < 5; ++i) {
    const auto t = static_cast<Eigen::Index>(uniform_index(rng, 10));
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, 3));
    const double num = numeric_grad(xh2, t, j, [&] { return vq_loss(x, xh2, e, q, 0.25).reconstruction; });
    CHECK(rel_err(num, rec.x_hat(t, j)) < 1e-4);
  }
}

TEST_CASE("straight-through view passes gradients unchanged") {
  Rng rng(14);
  const Codebook book(normal_matrix(8, 3, 1.0, rng));
  Matrix e = normal_matrix(6, 3, 1.0, rng);
  const ContentEmbedding q = quantize(e, book);
  const Matrix w = normal_matrix(6, 3, 1.0, rng);
  // Downstream scalar f(view) = sum w * view^2, view = e + sg[q - e].
  const Matrix offset = q.quantized - e;
  auto f = [&] { return (e + offset).cwiseProduct(e + offset).cwiseProduct(w).sum(); };
  const Matrix g_view = 2.0 * w.cwiseProduct(q.straight_through);
  const Matrix g_e = straight_through_backward(g_view);
  CHECK((g_e - g_view).cwiseAbs().maxCoeff() < 1e-6);
  for (int i = 0; i < 6; ++i) {
    const auto t = static_cast<Eigen::Index>(uniform_index(rng, 6));
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, 3));
    CHECK(rel_err(numeric_grad(e, t, j, f), g_e(t, j)) < 1e-6);
  }
}

TEST_CASE("instance norm statistics and affine invariance") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = normal_matrix(50, 6, uniform(rng, 0.1, 5.0), rng).array() + uniform(rng, -3, 3);
    const Matrix y = instance_norm(x);
    const RowVector mean = y.colwise().mean();
    const RowVector sd = (y.rowwise() - mean).array().square().colwise().mean().sqrt();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sd.array() - 1.0).abs().maxCoeff() < 1e-3);
    const double a = uniform(rng, 0.1, 10.0), b = uniform(rng, -5, 5);
    CHECK((instance_norm((a * x).array() + b) - y).cwiseAbs().maxCoeff() < 1e-5);
  }
  CHECK_THROWS_AS(instance_norm(Matrix::Ones(1, 3)), DataError);
  // A constant channel maps to zeros instead of blowing up.
  Matrix c = normal_matrix(10, 2, 1.0, rng);
  c.col(1).setConstant(4.0);
  CHECK(instance_norm(c).col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("instance norm over a batch normalizes each sequence separately, with gradients") {
  Rng rng(16);
  InstanceNorm in;
  Matrix x = normal_matrix(2 * 8, 3, 1.0, rng);
  x.topRows(8).array() += 10.0;
  const SeqBatch y = in.forward(SeqBatch(x, 2, 8));
  CHECK((y.seq(0) - instance_norm(x.topRows(8))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((y.seq(1) - instance_norm(x.bottomRows(8))).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix w = normal_matrix(16, 3, 1.0, rng);
  const Matrix g = in.backward(w);
  for (int i = 0; i < 8; ++i) {
    const auto r = static_cast<Eigen::Index>(uniform_index(rng, 16));
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, 3));
    const double num = numeric_grad(x, r, c, [&] {
      InstanceNorm tmp;
      return tmp.forward(SeqBatch(x, 2, 8)).data.cwiseProduct(w).sum();
    });
    CHECK(rel_err(num, g(r, c)) < 1e-5);
  }
}

TEST_CASE("infonce matches the softmax definition") {
  Rng rng(17);
  const RowVector p = normal_matrix(1, 4, 1.0, rng), pos = normal_matrix(1, 4, 1.0, rng);
  const Matrix neg = normal_matrix(5, 4, 1.0, rng);
  double z = std::exp(p.dot(pos));
  for (int i = 0; i < 5; ++i) z += std::exp(p.dot(neg.row(i)));
  CHECK(infonce(p, pos, neg) == doctest::Approx(-p.dot(pos) + std::log(z)).epsilon(1e-12));
  // Identical scores give ln(N + 1).
  CHECK(infonce(RowVector::Zero(4), pos, neg) == doctest::Approx(std::log(6.0)));
}

TEST_CASE("cpc gradients with respect to q") {
  Rng init(18);
  CpcModule cpc("cpc", 3, 4, CpcOptions{2, 3, false}, init);
  Rng rng(19);
  Matrix q = normal_matrix(2 * 7, 3, 1.0, rng);
  const std::uint64_t seed = 77;
  auto loss = [&] {
    Rng r(seed);
    return cpc.forward(SeqBatch(q, 2, 7), r);
  };
  loss();
  std::vector<Param *> ps;
  cpc.collect(ps);
  for (Param *p : ps) p->zero_grad();
  const Matrix g = cpc.backward(1.0);
  for (int i = 0; i < 10; ++i) {
    const auto r = static_cast<Eigen::Index>(uniform_index(rng, 14));
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, 3));
    CHECK(rel_err(numeric_grad(q, r, c, loss), g(r, c)) < 1e-5);
  }
  loss();
  for (Param *p : ps) p->zero_grad();
  cpc.backward(1.0);
  for (Param *p : ps) {
    const auto r = static_cast<Eigen::Index>(uniform_index(rng, p->value.rows()));
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, p->value.cols()));
    CHECK(rel_err(numeric_grad(p->value, r, c, loss), p->grad(r, c)) < 1e-5);
  }
}

TEST_CASE("cpc preconditions") {
  Rng init(20);
  CpcModule cpc("cpc", 3, 4, CpcOptions{4, 3, true}, init);
  Rng rng(1);
  CHECK_THROWS_AS(cpc.forward(SeqBatch(Matrix::Zero(8, 3), 2, 4), rng), DataError);  // T <= K
  // Same-utterance pool of a 6-frame sequence minus the positive is 5 >= 3.
  CHECK_NOTHROW(cpc.forward(SeqBatch(normal_matrix(6, 3, 1.0, rng), 1, 6), rng));
  CpcModule big("cpc", 3, 4, CpcOptions{1, 8, true}, init);
  CHECK_THROWS_AS(big.forward(SeqBatch(normal_matrix(6, 3, 1.0, rng), 1, 6), rng), DataError);
}

TEST_CASE("untrained cpc sits near chance") {
  Rng init(21);
  CpcModule cpc("cpc", 8, 8, CpcOptions{4, 8, false}, init);
  Rng rng(22);
  double sum = 0;
  for (int i = 0; i < 20; ++i) sum += cpc.forward(SeqBatch(normal_matrix(4 * 32, 8, 0.01, rng), 4, 32), rng);
  CHECK(std::abs(sum / 20 - std::log(9.0)) < 0.2);
}
