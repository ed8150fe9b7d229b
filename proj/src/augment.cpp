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

#include "noisevc/augment.hpp"

#include "noisevc/error.hpp"

namespace noisevc {

void AugmentPolicy::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("augment.alpha must be in [0, 1], got " + std::to_string(alpha));
  if (!(sigma >= 0.0)) throw ConfigError("augment.sigma must be >= 0, got " + std::to_string(sigma));
}

Matrix add_noise(const Matrix &x, Real sigma, Rng &rng) {
  if (sigma < 0) throw ConfigError("noise sigma must be >= 0");
  if (sigma == 0) return x;
  Matrix y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += sigma * normal(rng);
  return y;
}

MelSpectrogram add_noise(const MelSpectrogram &x, Real sigma, Rng &rng) {
  MelSpectrogram y = x;
  y.values = add_noise(x.values, sigma, rng);
  return y;
}

StepPlan plan_step(const AugmentPolicy &policy, Rng &rng) {
  const MelVersion v =
      uniform01(rng) < policy.alpha ? MelVersion::kAugmented : MelVersion::kOriginal;
  return StepPlan{v, v};
}

}  // namespace noisevc
