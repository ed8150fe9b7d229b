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

#include "noisevc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "noisevc/error.hpp"
#include "noisevc/tensor_io.hpp"

namespace noisevc {

namespace fs = std::filesystem;

void SyntheticSpec::validate() const {
  auto fail = [](const std::string &m) { throw ConfigError("synth: " + m); };
  if (n_speakers < 2) fail("n_speakers must be >= 2");
  if (n_content_symbols < 1) fail("n_content_symbols must be >= 1");
  if (min_len < 1 || max_len < min_len) fail("bad utterance length range");
  if (min_dur < 1 || max_dur < min_dur) fail("bad symbol duration range");
  if (n_mels < 8) fail("n_mels must be >= 8");
  if (contour_lo < 0 || contour_hi <= contour_lo + 4 || contour_hi >= n_mels - 4)
    fail("bad contour band");
  if (unseen_fraction < 0.0 || unseen_fraction >= 1.0) fail("unseen_fraction must be in [0,1)");
}

namespace {

// Smooth random curve over channels, roughly in [-1, 1].
RowVector smooth_curve(int n, Rng &rng) {
  RowVector v = RowVector::Zero(n);
  constexpr int kTerms = 3;
  for (int k = 0; k < kTerms; ++k) {
    const double cycles = uniform(rng, 0.5, 3.0);
    const double phase = uniform(rng, 0.0, 2.0 * M_PI);
    for (int c = 0; c < n; ++c)
      v[c] += std::cos(2.0 * M_PI * cycles * c / n + phase);
  }
  return v / std::sqrt(static_cast<double>(kTerms));
}

}  // namespace

SyntheticCorpus::SyntheticCorpus(SyntheticSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n = spec_.n_mels;
  Rng rng(derive_seed(spec_.seed, 0x74656d706cULL));

  constexpr double kBase = -3.0;
  templates_ = Matrix::Constant(spec_.n_content_symbols, n, kBase);
  for (int s = 0; s < spec_.n_content_symbols; ++s) {
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      RowVector t = RowVector::Constant(n, kBase);
      for (int b = 0; b < 3; ++b) {
        const double centre = uniform(rng, spec_.contour_hi + 2, n - 1);
        const double width = uniform(rng, 2.0, 6.0);
        const double height = spec_.template_scale * uniform(rng, 0.5, 1.0);
        for (int c = spec_.contour_hi; c < n; ++c) {
          const double d = (c - centre) / width;
          t[c] += height * std::exp(-0.5 * d * d);
        }
      }
      ok = true;
      for (int prev = 0; prev < s && ok; ++prev)
        ok = (templates_.row(prev) - t).norm() >= spec_.min_separation;
      if (ok) templates_.row(s) = t;
    }
    if (!ok) throw ConfigError("synth: cannot place content templates at min_separation");
  }

  for (int spk = 0; spk < spec_.n_speakers; ++spk) {
    Rng vr(derive_seed(spec_.seed, 0x766f696365ULL, static_cast<std::uint64_t>(spk)));
    SpeakerVoice v;
    v.gain = (spec_.gain_spread * smooth_curve(n, vr)).array().exp().matrix();
    v.offset = spec_.offset_spread * smooth_curve(n, vr);
    v.offset.array() += uniform(vr, -0.5, 0.5);
    v.contour_depth = uniform(vr, 1.5, 3.5);
    const double lo = spec_.contour_lo + v.contour_depth + 1.0;
    const double hi = spec_.contour_hi - v.contour_depth - 1.0;
    v.contour_base = lo < hi ? uniform(vr, lo, hi) : 0.5 * (spec_.contour_lo + spec_.contour_hi);
    v.contour_period = uniform(vr, 30.0, 90.0);
    voices_.push_back(std::move(v));
  }
}

std::vector<double> SyntheticCorpus::contour_track(int speaker_id, int n_frames,
                                                   double phase, Rng &rng) const {
  const SpeakerVoice &v = voices_.at(speaker_id);
  std::vector<double> track(n_frames);
  double walk = 0.0;
  for (int t = 0; t < n_frames; ++t) {
    walk = std::clamp(0.95 * walk + 0.1 * normal(rng), -1.0, 1.0);
    track[t] = v.contour_base +
               v.contour_depth * std::sin(2.0 * M_PI * t / v.contour_period + phase) + walk;
  }
  return track;
}

SyntheticSample SyntheticCorpus::render(int speaker_id, Rng &rng) const {
  if (speaker_id < 0 || speaker_id >= spec_.n_speakers)
    throw ConfigError("synth: speaker id " + std::to_string(speaker_id) + " out of range");
  const int n = spec_.n_mels;
  const int len = spec_.min_len +
                  static_cast<int>(uniform_index(rng, spec_.max_len - spec_.min_len + 1));
  std::vector<int> labels;
  labels.reserve(len);
  int prev = -1;
  while (static_cast<int>(labels.size()) < len) {
    int sym = static_cast<int>(uniform_index(rng, spec_.n_content_symbols));
    if (spec_.n_content_symbols > 1)
      while (sym == prev) sym = static_cast<int>(uniform_index(rng, spec_.n_content_symbols));
    const int dur = spec_.min_dur +
                    static_cast<int>(uniform_index(rng, spec_.max_dur - spec_.min_dur + 1));
    for (int i = 0; i < dur && static_cast<int>(labels.size()) < len; ++i) labels.push_back(sym);
    prev = sym;
  }
  const double phase = uniform(rng, 0.0, 2.0 * M_PI);
  const std::vector<double> track = contour_track(speaker_id, len, phase, rng);

  const SpeakerVoice &v = voices_[speaker_id];
  const double floor_value = std::log(1e-5);
  Matrix tm(len, n);
  for (int t = 0; t < len; ++t) {
    for (int c = 0; c < n; ++c) {
      const double d = (c - track[t]) / spec_.contour_width;
      double x = v.gain[c] * templates_(labels[t], c) + v.offset[c] +
                 spec_.contour_amplitude * std::exp(-0.5 * d * d) +
                 spec_.frame_noise * normal(rng);
      tm(t, c) = std::max(x, floor_value);
    }
  }
  SyntheticSample s;
  s.mel = MelSpectrogram::from_time_major(tm);
  s.content_labels = std::move(labels);
  s.speaker_id = speaker_id;
  return s;
}

SyntheticSample SyntheticCorpus::utterance(int speaker_id, int utt) const {
  Rng rng(derive_seed(spec_.seed, static_cast<std::uint64_t>(speaker_id) + 1,
                      static_cast<std::uint64_t>(utt) + 1));
  return render(speaker_id, rng);
}

SyntheticSample render_sample(const SyntheticSpec &spec, int speaker_id, Rng &rng) {
  return SyntheticCorpus(spec).render(speaker_id, rng);
}

std::string speaker_name(int speaker_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "spk%02d", speaker_id);
  return buf;
}

std::string utterance_name(int speaker_id, int utt) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "spk%02d_%03d", speaker_id, utt);
  return buf;
}

DatasetManifest generate_corpus(const SyntheticSpec &spec, int utterances_per_speaker,
                                const fs::path &out_dir) {
  if (utterances_per_speaker < 1) throw ConfigError("synth: utterances per speaker must be >= 1");
  const SyntheticCorpus corpus(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries;
  std::ostringstream labels;
  for (int spk = 0; spk < spec.n_speakers; ++spk) {
    for (int u = 0; u < utterances_per_speaker; ++u) {
      const SyntheticSample s = corpus.utterance(spk, u);
      ManifestEntry e;
      e.speaker_id = speaker_name(spk);
      e.utterance_id = utterance_name(spk, u);
      e.mel_path = e.speaker_id + "/" + e.utterance_id + ".mel";
      e.n_frames = s.mel.frames();
      write_mel(out_dir / e.mel_path, s.mel);
      labels << e.utterance_id;
      for (int l : s.content_labels) labels << ' ' << l;
      labels << '\n';
      entries.push_back(std::move(e));
    }
  }
  write_file_atomic(out_dir / "labels.txt", labels.str());
  const int n_unseen = static_cast<int>(std::lround(spec.unseen_fraction * spec.n_speakers));
  DatasetManifest m = split_speakers(std::move(entries), n_unseen, spec.seed);
  m.root = out_dir;
  write_manifest(out_dir / "manifest.jsonl", m);
  return m;
}

std::map<std::string, std::vector<int>> read_labels(const fs::path &path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::vector<int>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    std::vector<int> v;
    int x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw DataError("bad label line for " + id + " in " + path.string());
    out[id] = std::move(v);
  }
  return out;
}

}  // namespace noisevc
