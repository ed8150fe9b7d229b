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

#ifndef NOISEVC_FEATURES_HPP_
#define NOISEVC_FEATURES_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisevc/audio.hpp"
#include "noisevc/manifest.hpp"
#include "noisevc/mel.hpp"

namespace noisevc {

struct FeatureOptions {
  MelConfig mel;
  TrimOptions trim;
  int n_unseen = 20;
  std::uint64_t seed = 0;
};

struct FeatureRun {
  DatasetManifest manifest;
  std::vector<std::string> skipped;  // "<path>: <reason>" for silent or too-short clips
};

// <in>/<speaker>/**/*.wav -> <out>/<speaker>/<utt>.mel, then the speaker
// split, written to <out>/manifest.jsonl. Unreadable audio aborts the run.
FeatureRun extract_features(const std::filesystem::path &in_dir,
                            const std::filesystem::path &out_dir, const FeatureOptions &opts);

}  // namespace noisevc

#endif  // NOISEVC_FEATURES_HPP_
