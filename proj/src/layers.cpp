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

#include "noisevc/layers.hpp"

#include <cmath>

#include "noisevc/error.hpp"

namespace noisevc {

namespace {

void check_channels(const char *layer, int expected, Eigen::Index got) {
  if (got != expected)
    throw ShapeError(std::string(layer) + ": expected " + std::to_string(expected) +
                     " input channels, got " + std::to_string(got));
}

}  // namespace

Matrix to_time_major(const Matrix &x, int batch, int length) {
  Matrix out(x.rows(), x.cols());
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < length; ++t)
      out.row(static_cast<Eigen::Index>(t) * batch + b) =
          x.row(static_cast<Eigen::Index>(b) * length + t);
  return out;
}

Matrix to_batch_major(const Matrix &x, int batch, int length) {
  Matrix out(x.rows(), x.cols());
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < length; ++t)
      out.row(static_cast<Eigen::Index>(b) * length + t) =
          x.row(static_cast<Eigen::Index>(t) * batch + b);
  return out;
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::string name, int in_channels, int out_channels, int kernel, Rng &rng)
    : in_(in_channels), out_(out_channels), kernel_(kernel) {
  if (kernel % 2 == 0) throw ConfigError("conv kernel size must be odd");
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(kernel * in_channels));
  weight_ = Param(name + ".weight", uniform_matrix(kernel * in_channels, out_channels, bound, rng));
  bias_ = Param(name + ".bias", uniform_matrix(1, out_channels, bound, rng));
}

SeqBatch Conv1d::forward(const SeqBatch &x) {
  check_channels("conv1d", in_, x.data.cols());
  batch_ = x.batch;
  length_ = x.length;
  const int pad = (kernel_ - 1) / 2;
  const int T = length_;
  cols_.setZero(static_cast<Eigen::Index>(batch_) * T, static_cast<Eigen::Index>(kernel_) * in_);
  for (int b = 0; b < batch_; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * T;
    for (int j = 0; j < kernel_; ++j) {
      const int shift = j - pad;
      const int t0 = std::max(0, -shift);
      const int t1 = std::min(T, T - shift);
      if (t1 <= t0) continue;
      cols_.block(base + t0, static_cast<Eigen::Index>(j) * in_, t1 - t0, in_) =
          x.data.block(base + t0 + shift, 0, t1 - t0, in_);
    }
  }
  Matrix y = cols_ * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return SeqBatch(std::move(y), batch_, length_);
}

Matrix Conv1d::backward(const Matrix &grad_out) {
  weight_.grad.noalias() += cols_.transpose() * grad_out;
  bias_.grad += grad_out.colwise().sum();
  const Matrix dcols = grad_out * weight_.value.transpose();
  const int pad = (kernel_ - 1) / 2;
  const int T = length_;
  Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(batch_) * T, in_);
  for (int b = 0; b < batch_; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * T;
    for (int j = 0; j < kernel_; ++j) {
      const int shift = j - pad;
      const int t0 = std::max(0, -shift);
      const int t1 = std::min(T, T - shift);
      if (t1 <= t0) continue;
      dx.block(base + t0 + shift, 0, t1 - t0, in_) +=
          dcols.block(base + t0, static_cast<Eigen::Index>(j) * in_, t1 - t0, in_);
    }
  }
  return dx;
}

// ---------------------------------------------------------------- activations

SeqBatch LeakyRelu::forward(const SeqBatch &x) {
  input_ = x.data;
  Matrix y = x.data.unaryExpr([s = slope_](Real v) { return v > 0 ? v : s * v; });
  return SeqBatch(std::move(y), x.batch, x.length);
}

Matrix LeakyRelu::backward(const Matrix &grad_out) const {
  return grad_out.binaryExpr(input_, [s = slope_](Real g, Real v) { return v > 0 ? g : s * g; });
}

SeqBatch Relu::forward(const SeqBatch &x) {
  input_ = x.data;
  return SeqBatch(x.data.cwiseMax(0.0), x.batch, x.length);
}

Matrix Relu::backward(const Matrix &grad_out) const {
  return grad_out.binaryExpr(input_, [](Real g, Real v) { return v > 0 ? g : 0.0; });
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(std::string name, int channels, Real momentum, Real eps)
    : name_(std::move(name)), momentum_(momentum), eps_(eps) {
  gamma_ = Param(name_ + ".gamma", Matrix::Ones(1, channels));
  beta_ = Param(name_ + ".beta", Matrix::Zero(1, channels));
  running_mean_ = Matrix::Zero(1, channels);
  running_var_ = Matrix::Ones(1, channels);
}

void BatchNorm1d::collect_buffers(std::vector<Buffer> &out) {
  out.push_back({name_ + ".running_mean", &running_mean_});
  out.push_back({name_ + ".running_var", &running_var_});
}

SeqBatch BatchNorm1d::forward(const SeqBatch &x, bool training) {
  check_channels("batchnorm", static_cast<int>(gamma_.value.cols()), x.data.cols());
  training_ = training;
  const Eigen::Index n = x.data.rows();
  RowVector mean, var;
  if (training) {
    mean = x.data.colwise().mean();
    var = (x.data.rowwise() - mean).array().square().colwise().mean().matrix();
    const Real unbias = n > 1 ? static_cast<Real>(n) / (n - 1) : 1.0;
    running_mean_ = (1 - momentum_) * running_mean_ + momentum_ * mean;
    running_var_ = (1 - momentum_) * running_var_ + momentum_ * unbias * var;
  } else {
    mean = running_mean_.row(0);
    var = running_var_.row(0);
  }
  inv_std_ = (var.array() + eps_).rsqrt().matrix();
  xhat_ = ((x.data.rowwise() - mean).array().rowwise() * inv_std_.array()).matrix();
  Matrix y = (xhat_.array().rowwise() * gamma_.value.row(0).array()).matrix();
  y.rowwise() += beta_.value.row(0);
  return SeqBatch(std::move(y), x.batch, x.length);
}

Matrix BatchNorm1d::backward(const Matrix &grad_out) {
  gamma_.grad += (grad_out.array() * xhat_.array()).colwise().sum().matrix();
  beta_.grad += grad_out.colwise().sum();
  const Matrix dxhat = (grad_out.array().rowwise() * gamma_.value.row(0).array()).matrix();
  if (!training_) return (dxhat.array().rowwise() * inv_std_.array()).matrix();
  const Real n = static_cast<Real>(grad_out.rows());
  const RowVector sum_d = dxhat.colwise().sum();
  const RowVector sum_dx = (dxhat.array() * xhat_.array()).colwise().sum().matrix();
  Matrix dx = n * dxhat;
  dx.rowwise() -= sum_d;
  dx -= (xhat_.array().rowwise() * sum_dx.array()).matrix();
  return (dx.array().rowwise() * (inv_std_.array() / n)).matrix();
}

// ---------------------------------------------------------------- Linear

Linear::Linear(std::string name, int in_features, int out_features, Rng &rng) {
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(in_features));
  weight_ = Param(name + ".weight", uniform_matrix(in_features, out_features, bound, rng));
  bias_ = Param(name + ".bias", uniform_matrix(1, out_features, bound, rng));
}

Matrix Linear::apply(const Matrix &x) const {
  check_channels("linear", static_cast<int>(weight_.value.rows()), x.cols());
  Matrix y = x * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return y;
}

Matrix Linear::forward(const Matrix &x) {
  input_ = x;
  return apply(x);
}

Matrix Linear::backward(const Matrix &grad_out) {
  weight_.grad.noalias() += input_.transpose() * grad_out;
  bias_.grad += grad_out.colwise().sum();
  return grad_out * weight_.value.transpose();
}

// ---------------------------------------------------------------- Lstm

namespace {
inline Real sigmoid(Real v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

Lstm::Lstm(std::string name, int input_size, int hidden_size, Rng &rng)
    : input_(input_size), hidden_(hidden_size) {
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(hidden_size));
  w_input_ = Param(name + ".w_input", uniform_matrix(input_size, 4 * hidden_size, bound, rng));
  w_hidden_ = Param(name + ".w_hidden", uniform_matrix(hidden_size, 4 * hidden_size, bound, rng));
  bias_ = Param(name + ".bias", uniform_matrix(1, 4 * hidden_size, bound, rng));
  bias_.value.block(0, hidden_size, 1, hidden_size).array() += 1.0;  // forget gate
}

SeqBatch Lstm::forward(const SeqBatch &x) {
  check_channels("lstm", input_, x.data.cols());
  batch_ = x.batch;
  length_ = x.length;
  const int B = batch_, H = hidden_;
  x_tm_ = to_time_major(x.data, B, length_);
  gates_ = x_tm_ * w_input_.value;
  gates_.rowwise() += bias_.value.row(0);
  cells_.resize(gates_.rows(), H);
  hiddens_.resize(gates_.rows(), H);
  Matrix h_prev = Matrix::Zero(B, H), c_prev = Matrix::Zero(B, H);
  for (int t = 0; t < length_; ++t) {
    auto g = gates_.middleRows(static_cast<Eigen::Index>(t) * B, B);
    g.noalias() += h_prev * w_hidden_.value;
    g.leftCols(2 * H) = g.leftCols(2 * H).unaryExpr([](Real v) { return sigmoid(v); });
    g.middleCols(2 * H, H) = g.middleCols(2 * H, H).array().tanh().matrix();
    g.rightCols(H) = g.rightCols(H).unaryExpr([](Real v) { return sigmoid(v); });
    auto c = cells_.middleRows(static_cast<Eigen::Index>(t) * B, B);
    auto h = hiddens_.middleRows(static_cast<Eigen::Index>(t) * B, B);
    c = (g.middleCols(H, H).array() * c_prev.array() +
         g.leftCols(H).array() * g.middleCols(2 * H, H).array()).matrix();
    h = (g.rightCols(H).array() * c.array().tanh()).matrix();
    h_prev = h;
    c_prev = c;
  }
  return SeqBatch(to_batch_major(hiddens_, B, length_), B, length_);
}

Matrix Lstm::backward(const Matrix &grad_out) {
  const int B = batch_, H = hidden_;
  const Matrix g_tm = to_time_major(grad_out, B, length_);
  Matrix dpre(gates_.rows(), 4 * H);
  Matrix dh_next = Matrix::Zero(B, H), dc_next = Matrix::Zero(B, H);
  for (int t = length_ - 1; t >= 0; --t) {
    const Eigen::Index r = static_cast<Eigen::Index>(t) * B;
    const auto g = gates_.middleRows(r, B);
    const auto i = g.leftCols(H).array();
    const auto f = g.middleCols(H, H).array();
    const auto gg = g.middleCols(2 * H, H).array();
    const auto o = g.rightCols(H).array();
    const Eigen::ArrayXXd tc = cells_.middleRows(r, B).array().tanh();
    const Eigen::ArrayXXd dh = (g_tm.middleRows(r, B) + dh_next).array();
    const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
    Eigen::ArrayXXd c_prev = Eigen::ArrayXXd::Zero(B, H);
    if (t > 0) c_prev = cells_.middleRows(r - B, B).array();
    auto d = dpre.middleRows(r, B);
    d.leftCols(H) = (dc * gg * i * (1.0 - i)).matrix();
    d.middleCols(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
    d.middleCols(2 * H, H) = (dc * i * (1.0 - gg.square())).matrix();
    d.rightCols(H) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next.noalias() = d * w_hidden_.value.transpose();
    if (t > 0) w_hidden_.grad.noalias() += hiddens_.middleRows(r - B, B).transpose() * d;
  }
  w_input_.grad.noalias() += x_tm_.transpose() * dpre;
  bias_.grad += dpre.colwise().sum();
  return to_batch_major(dpre * w_input_.value.transpose(), B, length_);
}

}  // namespace noisevc
