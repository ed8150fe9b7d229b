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

#ifndef NOISEVC_SYNTH_HPP_
#define NOISEVC_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "noisevc/manifest.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/tensor.hpp"

namespace noisevc {

// Factorized corpus: each frame is a content symbol's spectral template, put
// through a per-speaker affine timbre (channel gain + offset), plus a
// speaker-specific slowly moving bump in a low "pitch" band.
struct SyntheticSpec {
  int n_speakers = 10;
  int n_content_symbols = 12;
  int min_len = 160;  // utterance length in frames, inclusive range
  int max_len = 256;
  int min_dur = 6;    // symbol duration in frames, inclusive range
  int max_dur = 16;
  std::uint64_t seed = 0;
  int n_mels = 80;

  double template_scale = 2.0;   // peak height of formant-like bumps
  double min_separation = 6.0;   // min pairwise L2 distance between templates
  double gain_spread = 0.25;     // log-gain std per channel
  double offset_spread = 0.8;    // per-channel offset amplitude
  double contour_amplitude = 0.4;
  int contour_lo = 2;            // pitch band [lo, hi)
  int contour_hi = 20;
  double contour_width = 1.5;    // bump std in channels
  double frame_noise = 0.02;     // i.i.d. observation noise
  double unseen_fraction = 0.2;

  void validate() const;
};

struct SyntheticSample {
  MelSpectrogram mel;
  std::vector<int> content_labels;  // one per frame
  int speaker_id = 0;
};

// Per-speaker factors, derived deterministically from the spec seed.
struct SpeakerVoice {
  RowVector gain;    // multiplicative, per channel
  RowVector offset;  // additive, per channel
  double contour_base = 0.0;
  double contour_depth = 0.0;
  double contour_period = 0.0;
};

class SyntheticCorpus {
 public:
  explicit SyntheticCorpus(SyntheticSpec spec);

  const SyntheticSpec &spec() const { return spec_; }
  const Matrix &templates() const { return templates_; }  // symbols x n_mels
  const SpeakerVoice &voice(int speaker) const { return voices_.at(speaker); }

  // Draws a symbol sequence and contour phase from `rng` (independent of the
  // speaker) and renders it in `speaker_id`'s voice.
  SyntheticSample render(int speaker_id, Rng &rng) const;

  // Deterministic utterance `utt` of `speaker_id`.
  SyntheticSample utterance(int speaker_id, int utt) const;

  // Contour bump position (fractional channel) per frame; exposed for the
  // pitch-proxy checks.
  std::vector<double> contour_track(int speaker_id, int n_frames, double phase,
                                    Rng &rng) const;

 private:
  SyntheticSpec spec_;
  Matrix templates_;
  std::vector<SpeakerVoice> voices_;
};

SyntheticSample render_sample(const SyntheticSpec &spec, int speaker_id, Rng &rng);

std::string speaker_name(int speaker_id);
std::string utterance_name(int speaker_id, int utt);

// Writes <out>/<speaker>/<utt>.mel, <out>/labels.txt (one line per utterance:
// id followed by per-frame symbol ids) and <out>/manifest.jsonl.
DatasetManifest generate_corpus(const SyntheticSpec &spec, int utterances_per_speaker,
                                const std::filesystem::path &out_dir);

std::map<std::string, std::vector<int>> read_labels(const std::filesystem::path &path);

}  // namespace noisevc

#endif  // NOISEVC_SYNTH_HPP_
