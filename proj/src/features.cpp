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

#include "noisevc/features.hpp"

#include <algorithm>

#include "noisevc/error.hpp"

namespace noisevc {

namespace fs = std::filesystem;

FeatureRun extract_features(const fs::path &in_dir, const fs::path &out_dir,
                            const FeatureOptions &opts) {
  if (!fs::is_directory(in_dir)) throw DataError("features: no such directory " + in_dir.string());
  std::vector<fs::path> speakers;
  for (const auto &d : fs::directory_iterator(in_dir))
    if (d.is_directory()) speakers.push_back(d.path());
  std::sort(speakers.begin(), speakers.end());

  FeatureRun run;
  for (const fs::path &spk_dir : speakers) {
    const std::string spk = spk_dir.filename().string();
    std::vector<fs::path> wavs;
    for (const auto &f : fs::recursive_directory_iterator(spk_dir))
      if (f.is_regular_file() && f.path().extension() == ".wav") wavs.push_back(f.path());
    std::sort(wavs.begin(), wavs.end());
    for (const fs::path &wav : wavs) {
      AudioClip clip;
      try {
        clip = trim_silence(load_and_resample(wav, opts.mel.sample_rate), opts.trim);
      } catch (const EmptyClipError &e) {
        run.skipped.push_back(wav.string() + ": " + e.what());
        continue;
      }
      if (clip.samples.size() < static_cast<std::size_t>(opts.mel.window_samples)) {
        run.skipped.push_back(wav.string() + ": shorter than one analysis window after trimming");
        continue;
      }
      write_mel(out_dir / spk / (wav.stem().string() + ".mel"), mel_spectrogram(clip, opts.mel));
    }
  }
  run.manifest = build_manifest(out_dir, opts.n_unseen, opts.seed);
  write_manifest(out_dir / "manifest.jsonl", run.manifest);
  return run;
}

}  // namespace noisevc
