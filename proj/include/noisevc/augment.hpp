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

#ifndef NOISEVC_AUGMENT_HPP_
#define NOISEVC_AUGMENT_HPP_

#include <cstdint>

#include "noisevc/mel.hpp"
#include "noisevc/tensor.hpp"

namespace noisevc {

struct AugmentPolicy {
  Real alpha = 0.5;  // probability an example uses the noisy version
  Real sigma = 0.1;  // noise std in log-mel units
  std::uint64_t seed = 0;

  void validate() const;
};

enum class MelVersion { kOriginal, kAugmented };

// Which spectrogram feeds the speaker encoder and which one the decoder must
// reconstruct. The two always agree; the content encoder always gets the
// original.
struct StepPlan {
  MelVersion speaker_input = MelVersion::kOriginal;
  MelVersion target = MelVersion::kOriginal;
  static constexpr MelVersion content_input() { return MelVersion::kOriginal; }
};

Matrix add_noise(const Matrix &x, Real sigma, Rng &rng);
MelSpectrogram add_noise(const MelSpectrogram &x, Real sigma, Rng &rng);

StepPlan plan_step(const AugmentPolicy &policy, Rng &rng);

}  // namespace noisevc

#endif  // NOISEVC_AUGMENT_HPP_
