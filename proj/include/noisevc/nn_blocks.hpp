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

#ifndef NOISEVC_NN_BLOCKS_HPP_
#define NOISEVC_NN_BLOCKS_HPP_

#include <string>
#include <vector>

#include "noisevc/layers.hpp"
#include "noisevc/tensor.hpp"

namespace noisevc {

// ------------------------------------------------------------ quantization

struct Codebook {
  Param codes;  // V x D

  Codebook() = default;
  explicit Codebook(Matrix c) : codes("codebook", std::move(c)) {}
  // Entries i.i.d. uniform in [-1/V, 1/V].
  static Codebook random(int size, int dim, Rng &rng);

  int size() const { return static_cast<int>(codes.value.rows()); }
  int dim() const { return static_cast<int>(codes.value.cols()); }
};

// Q = {q_t}: quantized rows, the chosen code indices, and the decoder-facing
// straight-through view. The straight-through view has the same values as
// `quantized`; gradients reaching it are routed to the encoder output
// unchanged (see straight_through_backward).
struct ContentEmbedding {
  Matrix quantized;
  std::vector<int> indices;
  Matrix straight_through;
};

// Nearest code per row by squared Euclidean distance; ties go to the lowest
// index.
ContentEmbedding quantize(const Matrix &encoded, const Codebook &book);

// Gradient w.r.t. the encoder output given a gradient w.r.t. the
// straight-through view: identity.
inline Matrix straight_through_backward(const Matrix &grad_view) { return grad_view; }

struct LossBundle {
  Real reconstruction = 0;
  Real codebook_term = 0;
  Real commitment_term = 0;
  Real cpc = 0;
  Real total = 0;

  void finalize() { total = reconstruction + codebook_term + commitment_term + cpc; }
  bool finite() const;
  // Name of the first non-finite field, or empty.
  std::string first_non_finite() const;
};

// Which loss terms contribute gradients. Values are always reported.
struct LossTerms {
  bool reconstruction = true;
  bool codebook = true;
  bool commitment = true;
  bool cpc = true;
};

// Mean-reduced VQ objective:
//   reconstruction = mean|x - x_hat| + mean (x - x_hat)^2
//   codebook_term  = mean ||sg[e] - q||^2
//   commitment     = beta * mean ||e - sg[q]||^2
LossBundle vq_loss(const Matrix &x, const Matrix &x_hat, const Matrix &encoded,
                   const ContentEmbedding &q, Real beta);

struct VqGradients {
  Matrix x_hat;    // d/dx_hat of the reconstruction term
  Matrix encoded;  // d/de of the commitment term (the codebook term has none)
  Matrix codes;    // d/dcodes of the codebook term (commitment has none)
};

VqGradients vq_loss_backward(const Matrix &x, const Matrix &x_hat, const Matrix &encoded,
                             const ContentEmbedding &q, const Codebook &book, Real beta,
                             const LossTerms &terms = {});

// ------------------------------------------------------------ instance norm

constexpr Real kInstanceNormEps = 1e-5;

// Per-sequence, per-channel (x - mean) / max(std, eps) with the population
// std. Flooring rather than adding eps keeps the output exactly invariant to
// affine rescaling of non-constant channels.
class InstanceNorm {
 public:
  explicit InstanceNorm(Real eps = kInstanceNormEps) : eps_(eps) {}
  SeqBatch forward(const SeqBatch &x);
  Matrix backward(const Matrix &grad_out) const;

 private:
  Real eps_;
  Matrix centered_;
  Matrix stds_;  // batch x C
  int batch_ = 0, length_ = 0;
};

// Single-sequence convenience form; rows are time steps. Requires T >= 2.
Matrix instance_norm(const Matrix &encoded, Real eps = kInstanceNormEps);

// ------------------------------------------------------------ CPC

struct CpcOptions {
  int steps = 12;           // K
  int negatives = 8;
  bool same_utterance = false;  // draw negatives only from the positive's sequence
};

// -log softmax of the positive among {positive} U negatives, scored by dot
// product with `prediction`.
Real infonce(const RowVector &prediction, const RowVector &positive, const Matrix &negatives);

// Context LSTM over Q followed by K affine predictors. forward() returns the
// InfoNCE loss averaged over valid t for each k, then over k.
class CpcModule {
 public:
  CpcModule() = default;
  CpcModule(std::string name, int code_dim, int context_dim, CpcOptions opts, Rng &rng);

  Real forward(const SeqBatch &q, Rng &rng);
  // Gradient of (scale * loss) w.r.t. the q passed to forward(). This covers
  // both the context input and the positive/negative targets.
  Matrix backward(Real scale);

  // Context sequence of the last forward().
  const SeqBatch &context() const { return context_out_; }
  SeqBatch context_only(const SeqBatch &q);

  void collect(std::vector<Param *> &out);
  const CpcOptions &options() const { return opts_; }
  Lstm &context_network() { return context_; }
  Linear &predictor(int k) { return predictors_.at(k - 1); }

 private:
  CpcOptions opts_;
  Lstm context_;
  std::vector<Linear> predictors_;
  // forward caches
  Matrix q_;
  SeqBatch context_out_;
  std::vector<Matrix> predictions_;
  struct Term {
    int row;        // predicting row in q_
    int k;
    Real weight;
    std::vector<int> candidates;  // [positive, negatives...]
    std::vector<Real> probs;
  };
  std::vector<Term> terms_;
};

}  // namespace noisevc

#endif  // NOISEVC_NN_BLOCKS_HPP_
