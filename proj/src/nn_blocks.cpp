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

#include "noisevc/nn_blocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noisevc/error.hpp"

namespace noisevc {

// ------------------------------------------------------------ quantization

Codebook Codebook::random(int size, int dim, Rng &rng) {
  if (size < 1 || dim < 1) throw ConfigError("codebook size and dimension must be >= 1");
  return Codebook(uniform_matrix(size, dim, 1.0 / size, rng));
}

ContentEmbedding quantize(const Matrix &encoded, const Codebook &book) {
  if (encoded.cols() != book.dim())
    throw ShapeError("quantize: encoder dim " + std::to_string(encoded.cols()) +
                     " != codebook dim " + std::to_string(book.dim()));
  const Matrix &codes = book.codes.value;
  ContentEmbedding out;
  out.indices.resize(static_cast<std::size_t>(encoded.rows()));
  out.quantized.resize(encoded.rows(), encoded.cols());
  for (Eigen::Index t = 0; t < encoded.rows(); ++t) {
    Real best = std::numeric_limits<Real>::infinity();
    int best_i = 0;
    for (Eigen::Index v = 0; v < codes.rows(); ++v) {
      const Real d = (codes.row(v) - encoded.row(t)).squaredNorm();
      if (d < best) {
        best = d;
        best_i = static_cast<int>(v);
      }
    }
    out.indices[static_cast<std::size_t>(t)] = best_i;
    out.quantized.row(t) = codes.row(best_i);
  }
  out.straight_through = out.quantized;
  return out;
}

bool LossBundle::finite() const { return first_non_finite().empty(); }

std::string LossBundle::first_non_finite() const {
  if (!std::isfinite(reconstruction)) return "reconstruction";
  if (!std::isfinite(codebook_term)) return "codebook";
  if (!std::isfinite(commitment_term)) return "commitment";
  if (!std::isfinite(cpc)) return "cpc";
  if (!std::isfinite(total)) return "total";
  return {};
}

namespace {

void check_same_shape(const char *what, const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace

LossBundle vq_loss(const Matrix &x, const Matrix &x_hat, const Matrix &encoded,
                   const ContentEmbedding &q, Real beta) {
  check_same_shape("vq_loss(x, x_hat)", x, x_hat);
  check_same_shape("vq_loss(e, q)", encoded, q.quantized);
  if (beta < 0) throw ConfigError("beta must be >= 0");
  LossBundle l;
  const auto diff = (x - x_hat).array();
  l.reconstruction = diff.abs().mean() + diff.square().mean();
  const Real sq = (encoded - q.quantized).array().square().mean();
  l.codebook_term = sq;
  l.commitment_term = beta * sq;
  l.finalize();
  return l;
}

VqGradients vq_loss_backward(const Matrix &x, const Matrix &x_hat, const Matrix &encoded,
                             const ContentEmbedding &q, const Codebook &book, Real beta,
                             const LossTerms &terms) {
  check_same_shape("vq_loss(x, x_hat)", x, x_hat);
  check_same_shape("vq_loss(e, q)", encoded, q.quantized);
  VqGradients g;
  const Real n_rec = static_cast<Real>(x.size());
  if (terms.reconstruction) {
    const Matrix r = x_hat - x;
    g.x_hat = (r.array().sign() + 2.0 * r.array()).matrix() / n_rec;
  } else {
    g.x_hat = Matrix::Zero(x.rows(), x.cols());
  }
  const Real n_e = static_cast<Real>(encoded.size());
  const Matrix delta = encoded - q.quantized;  // e - q
  g.encoded = terms.commitment ? Matrix(2.0 * beta * delta / n_e)
                               : Matrix(Matrix::Zero(encoded.rows(), encoded.cols()));
  g.codes = Matrix::Zero(book.size(), book.dim());
  if (terms.codebook) {
    for (Eigen::Index t = 0; t < encoded.rows(); ++t)
      g.codes.row(q.indices[static_cast<std::size_t>(t)]) -= 2.0 * delta.row(t) / n_e;
  }
  return g;
}

// ------------------------------------------------------------ instance norm

SeqBatch InstanceNorm::forward(const SeqBatch &x) {
  if (x.length < 2) throw DataError("instance_norm needs at least 2 frames");
  batch_ = x.batch;
  length_ = x.length;
  const int C = x.channels();
  centered_.resize(x.data.rows(), C);
  stds_.resize(batch_, C);
  Matrix y(x.data.rows(), C);
  for (int b = 0; b < batch_; ++b) {
    const auto xs = x.seq(b);
    const RowVector mean = xs.colwise().mean();
    auto cs = centered_.middleRows(static_cast<Eigen::Index>(b) * length_, length_);
    cs = xs.rowwise() - mean;
    const RowVector sd = cs.array().square().colwise().mean().sqrt().matrix();
    stds_.row(b) = sd;
    y.middleRows(static_cast<Eigen::Index>(b) * length_, length_) =
        (cs.array().rowwise() / sd.array().max(eps_)).matrix();
  }
  return SeqBatch(std::move(y), batch_, length_);
}

Matrix InstanceNorm::backward(const Matrix &grad_out) const {
  const int C = static_cast<int>(grad_out.cols());
  const Real n = static_cast<Real>(length_);
  Matrix dx(grad_out.rows(), C);
  for (int b = 0; b < batch_; ++b) {
    const Eigen::Index r = static_cast<Eigen::Index>(b) * length_;
    const auto g = grad_out.middleRows(r, length_);
    const auto xc = centered_.middleRows(r, length_);
    for (int c = 0; c < C; ++c) {
      const Real sd = stds_(b, c);
      const Real s = std::max(sd, eps_);
      const Real gmean = g.col(c).mean();
      // dL/dsd = -sum(g * xc) / s^2 ; dsd/dx_i = xc_i / (n * sd). The floor
      // is constant, so below it only the centering term remains.
      const Real dsd = -(g.col(c).array() * xc.col(c).array()).sum() / (s * s);
      const Real coef = sd > eps_ ? dsd / (n * sd) : 0.0;
      dx.block(r, c, length_, 1) =
          ((g.col(c).array() - gmean) / s + coef * xc.col(c).array()).matrix();
    }
  }
  return dx;
}

Matrix instance_norm(const Matrix &encoded, Real eps) {
  InstanceNorm in(eps);
  return in.forward(SeqBatch(encoded, 1, static_cast<int>(encoded.rows()))).data;
}

// ------------------------------------------------------------ CPC

Real infonce(const RowVector &prediction, const RowVector &positive, const Matrix &negatives) {
  const Eigen::Index n = negatives.rows() + 1;
  Vector logits(n);
  logits[0] = prediction.dot(positive);
  for (Eigen::Index j = 0; j < negatives.rows(); ++j)
    logits[j + 1] = prediction.dot(negatives.row(j));
  const Real m = logits.maxCoeff();
  const Real lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[0];
}

CpcModule::CpcModule(std::string name, int code_dim, int context_dim, CpcOptions opts,
                     Rng &rng)
    : opts_(opts), context_(name + ".context", code_dim, context_dim, rng) {
  if (opts_.steps < 1) throw ConfigError("cpc: steps must be >= 1");
  if (opts_.negatives < 1) throw ConfigError("cpc: negatives must be >= 1");
  for (int k = 1; k <= opts_.steps; ++k)
    predictors_.emplace_back(name + ".pred" + std::to_string(k), context_dim, code_dim, rng);
}

void CpcModule::collect(std::vector<Param *> &out) {
  context_.collect(out);
  for (auto &p : predictors_) p.collect(out);
}

SeqBatch CpcModule::context_only(const SeqBatch &q) { return context_.forward(q); }

Real CpcModule::forward(const SeqBatch &q, Rng &rng) {
  const int B = q.batch, T = q.length, K = opts_.steps, N = opts_.negatives;
  if (T <= K)
    throw DataError("cpc: sequence length " + std::to_string(T) + " must exceed K=" +
                    std::to_string(K));
  const int pool = opts_.same_utterance ? T : B * T;
  if (pool - 1 < N)
    throw DataError("cpc: candidate pool of " + std::to_string(pool - 1) +
                    " frames cannot supply " + std::to_string(N) + " distinct negatives");
  q_ = q.data;
  context_out_ = context_.forward(q);
  predictions_.assign(K, Matrix());
  terms_.clear();
  terms_.reserve(static_cast<std::size_t>(B) * T * K);
  Real loss = 0.0;
  Vector logits(N + 1);
  for (int k = 1; k <= K; ++k) {
    predictions_[k - 1] = predictors_[k - 1].forward(context_out_.data);
    const Matrix &pred = predictions_[k - 1];
    const Real w = 1.0 / (static_cast<Real>(B) * (T - k) * K);
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t + k < T; ++t) {
        Term term;
        term.row = b * T + t;
        term.k = k;
        term.weight = w;
        const int pos = b * T + t + k;
        term.candidates.reserve(N + 1);
        term.candidates.push_back(pos);
        const int base = opts_.same_utterance ? b * T : 0;
        while (static_cast<int>(term.candidates.size()) < N + 1) {
          const int c = base + static_cast<int>(uniform_index(rng, pool));
          if (std::find(term.candidates.begin(), term.candidates.end(), c) ==
              term.candidates.end())
            term.candidates.push_back(c);
        }
        for (int j = 0; j <= N; ++j) logits[j] = pred.row(term.row).dot(q_.row(term.candidates[j]));
        const Real m = logits.maxCoeff();
        const Vector e = (logits.array() - m).exp().matrix();
        const Real z = e.sum();
        loss += w * (m + std::log(z) - logits[0]);
        term.probs.assign(e.data(), e.data() + N + 1);
        for (Real &p : term.probs) p /= z;
        terms_.push_back(std::move(term));
      }
    }
  }
  return loss;
}

Matrix CpcModule::backward(Real scale) {
  const int K = opts_.steps;
  Matrix dq = Matrix::Zero(q_.rows(), q_.cols());
  std::vector<Matrix> dpred(K);
  for (int k = 0; k < K; ++k) dpred[k] = Matrix::Zero(predictions_[k].rows(), predictions_[k].cols());
  for (const Term &term : terms_) {
    const auto pred = predictions_[term.k - 1].row(term.row);
    auto dp = dpred[term.k - 1].row(term.row);
    for (std::size_t j = 0; j < term.candidates.size(); ++j) {
      const Real coef = scale * term.weight * (term.probs[j] - (j == 0 ? 1.0 : 0.0));
      dp += coef * q_.row(term.candidates[j]);
      dq.row(term.candidates[j]) += coef * pred;
    }
  }
  Matrix dctx = Matrix::Zero(context_out_.data.rows(), context_out_.data.cols());
  for (int k = 0; k < K; ++k) dctx += predictors_[k].backward(dpred[k]);
  dq += context_.backward(dctx);
  return dq;
}

}  // namespace noisevc
