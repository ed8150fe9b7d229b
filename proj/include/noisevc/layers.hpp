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

#ifndef NOISEVC_LAYERS_HPP_
#define NOISEVC_LAYERS_HPP_

#include <string>
#include <vector>

#include "noisevc/tensor.hpp"

namespace noisevc {

// Layers cache what their backward pass needs during forward(); backward()
// accumulates parameter gradients and returns the gradient w.r.t. the input.
// A layer supports one outstanding forward/backward pair at a time.

// 1-D convolution over time, stride 1, symmetric zero padding so the output
// length equals the input length. Kernel size must be odd.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(std::string name, int in_channels, int out_channels, int kernel, Rng &rng);

  SeqBatch forward(const SeqBatch &x);
  Matrix backward(const Matrix &grad_out);
  void collect(std::vector<Param *> &out) { out.push_back(&weight_); out.push_back(&bias_); }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  Param &weight() { return weight_; }
  Param &bias() { return bias_; }

 private:
  int in_ = 0, out_ = 0, kernel_ = 1;
  Param weight_;  // (kernel * in) x out; row j*in + c multiplies x[t + j - pad][c]
  Param bias_;    // 1 x out
  Matrix cols_;
  int batch_ = 0, length_ = 0;
};

class LeakyRelu {
 public:
  explicit LeakyRelu(Real slope = 0.2) : slope_(slope) {}
  SeqBatch forward(const SeqBatch &x);
  Matrix backward(const Matrix &grad_out) const;

 private:
  Real slope_;
  Matrix input_;
};

class Relu {
 public:
  SeqBatch forward(const SeqBatch &x);
  Matrix backward(const Matrix &grad_out) const;

 private:
  Matrix input_;
};

// Per-channel batch normalization over all rows of the batch. In inference
// mode the running statistics are used.
class BatchNorm1d {
 public:
  BatchNorm1d() = default;
  BatchNorm1d(std::string name, int channels, Real momentum = 0.1, Real eps = 1e-5);

  SeqBatch forward(const SeqBatch &x, bool training);
  Matrix backward(const Matrix &grad_out);
  void collect(std::vector<Param *> &out) { out.push_back(&gamma_); out.push_back(&beta_); }
  void collect_buffers(std::vector<Buffer> &out);

 private:
  std::string name_;
  Param gamma_, beta_;
  Matrix running_mean_, running_var_;  // 1 x C
  Real momentum_ = 0.1, eps_ = 1e-5;
  Matrix xhat_;
  RowVector inv_std_;
  bool training_ = true;
};

class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features, Rng &rng);

  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &grad_out);
  void collect(std::vector<Param *> &out) { out.push_back(&weight_); out.push_back(&bias_); }

  Param &weight() { return weight_; }
  Param &bias() { return bias_; }
  // Stateless evaluation; does not touch the backward cache.
  Matrix apply(const Matrix &x) const;

 private:
  Param weight_;  // in x out
  Param bias_;    // 1 x out
  Matrix input_;
};

// Single-layer unidirectional LSTM (gate order i, f, g, o), zero initial
// state per sequence.
class Lstm {
 public:
  Lstm() = default;
  Lstm(std::string name, int input_size, int hidden_size, Rng &rng);

  SeqBatch forward(const SeqBatch &x);
  Matrix backward(const Matrix &grad_out);
  void collect(std::vector<Param *> &out) {
    out.push_back(&w_input_);
    out.push_back(&w_hidden_);
    out.push_back(&bias_);
  }
  int hidden_size() const { return hidden_; }

 private:
  int input_ = 0, hidden_ = 0;
  Param w_input_;   // input x 4H
  Param w_hidden_;  // H x 4H
  Param bias_;      // 1 x 4H
  // Time-major caches: row t*B + b.
  Matrix x_tm_, gates_, cells_, hiddens_;
  int batch_ = 0, length_ = 0;
};

// Row reordering between batch-major (b*T + t) and time-major (t*B + b).
Matrix to_time_major(const Matrix &x, int batch, int length);
Matrix to_batch_major(const Matrix &x, int batch, int length);

}  // namespace noisevc

#endif  // NOISEVC_LAYERS_HPP_
