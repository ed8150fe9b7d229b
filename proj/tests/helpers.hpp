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

#ifndef NOISEVC_TESTS_HELPERS_HPP_
#define NOISEVC_TESTS_HELPERS_HPP_

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "noisevc/tensor.hpp"

namespace testutil {

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string &name) {
  const std::filesystem::path p = std::filesystem::path(NVC_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Central difference of f with respect to m(i, j).
inline double numeric_grad(noisevc::Matrix &m, Eigen::Index i, Eigen::Index j,
                           const std::function<double()> &f, double h = 1e-6) {
  const double keep = m(i, j);
  m(i, j) = keep + h;
  const double up = f();
  m(i, j) = keep - h;
  const double down = f();
  m(i, j) = keep;
  return (up - down) / (2 * h);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace testutil

#endif  // NOISEVC_TESTS_HELPERS_HPP_
