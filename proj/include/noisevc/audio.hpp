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

#ifndef NOISEVC_AUDIO_HPP_
#define NOISEVC_AUDIO_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace noisevc {

struct AudioClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 0;
  std::string speaker_id;
  std::string utterance_id;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// RIFF/WAVE reader for PCM 8/16/24/32-bit and IEEE float 32/64. Channels are
// averaged to mono.
AudioClip read_wav(const std::filesystem::path &path);

// 16-bit PCM mono writer; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path &path, const AudioClip &clip);

// Band-limited (Kaiser-windowed sinc) sample-rate conversion.
std::vector<double> resample(const std::vector<double> &in, int from_rate,
                             int to_rate);

// Reads `path`, converts to `target_rate` and scales so the peak is <= 1.
AudioClip load_and_resample(const std::filesystem::path &path, int target_rate);

struct TrimOptions {
  double threshold_db = -40.0;
  int frame_samples = 1024;
};

// Drops leading/trailing frames whose RMS is more than |threshold_db| below
// the peak sample, then trims the kept span to its first and last samples
// above that level.
AudioClip trim_silence(const AudioClip &clip, const TrimOptions &opts = {});

}  // namespace noisevc

#endif  // NOISEVC_AUDIO_HPP_
