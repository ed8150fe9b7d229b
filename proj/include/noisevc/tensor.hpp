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

#ifndef NOISEVC_TENSOR_HPP_
#define NOISEVC_TENSOR_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace noisevc {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

// A batch of equal-length sequences stored time-within-batch: row b*length+t
// holds frame t of sequence b.
struct SeqBatch {
  Matrix data;
  int batch = 0;
  int length = 0;

  SeqBatch() = default;
  SeqBatch(Matrix d, int b, int t) : data(std::move(d)), batch(b), length(t) {}

  int channels() const { return static_cast<int>(data.cols()); }
  int rows() const { return batch * length; }
  auto seq(int b) { return data.middleRows(static_cast<Eigen::Index>(b) * length, length); }
  auto seq(int b) const {
    return data.middleRows(static_cast<Eigen::Index>(b) * length, length);
  }
};

// Learnable tensor with its accumulated gradient.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(); }
};

// Non-learnable state that still belongs in a checkpoint (running stats).
struct Buffer {
  std::string name;
  Matrix *value = nullptr;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

// Portable draws; std distributions are implementation-defined.
inline Real uniform01(Rng &rng) {
  return static_cast<Real>(rng() >> 11) * 0x1.0p-53;
}

inline Real uniform(Rng &rng, Real lo, Real hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
  // Rejection sampling, no modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

inline Real normal(Rng &rng) {
  Real u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const Real u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename T>
void shuffle(std::vector<T> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Real bound,
                             Rng &rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = uniform(rng, -bound, bound);
  return m;
}

inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Real stddev,
                            Rng &rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * normal(rng);
  return m;
}

inline bool all_finite(const Matrix &m) { return m.allFinite(); }

}  // namespace noisevc

#endif  // NOISEVC_TENSOR_HPP_
