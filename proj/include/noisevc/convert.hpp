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

#ifndef NOISEVC_CONVERT_HPP_
#define NOISEVC_CONVERT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "noisevc/audio.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/model.hpp"

namespace noisevc {

struct ConversionRequest {
  MelSpectrogram source;
  // One or more utterances of the target speaker; their embeddings are
  // averaged.
  std::vector<MelSpectrogram> targets;
};

// Which input fed which encoder during a conversion.
struct ConversionTrace {
  std::vector<std::string> content_inputs;
  std::vector<std::string> speaker_inputs;
};

// decode(encode_content(source), encode_speaker(target, T_source)).
MelSpectrogram convert(NoiseVC &net, const ConversionRequest &req, ConversionTrace *trace = nullptr);

// Magnitude via the filterbank pseudo-inverse, then Griffin-Lim phase
// recovery. Output has (T - 1) * hop + window samples.
AudioClip invert_mel(const MelSpectrogram &mel, int n_iters, std::uint64_t seed = 0);

// Reads a .mel tensor, or computes the mel of a .wav file.
MelSpectrogram load_mel_or_wav(const std::filesystem::path &path, const MelConfig &cfg = {});

}  // namespace noisevc

#endif  // NOISEVC_CONVERT_HPP_
