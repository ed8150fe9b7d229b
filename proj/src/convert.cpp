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

#include "noisevc/convert.hpp"

#include <cmath>

#include "noisevc/error.hpp"

namespace noisevc {

namespace {

void check_mel(const MelSpectrogram &m, const char *what) {
  if (m.frames() < 2)
    throw DataError(std::string("convert: ") + what + " needs at least 2 frames, got " +
                    std::to_string(m.frames()));
  if (!m.values.allFinite()) throw DataError(std::string("convert: ") + what + " has non-finite values");
}

}  // namespace

MelSpectrogram convert(NoiseVC &net, const ConversionRequest &req, ConversionTrace *trace) {
  check_mel(req.source, "source");
  if (req.targets.empty()) throw UsageError("convert: no target utterance");
  for (const MelSpectrogram &t : req.targets) check_mel(t, "target");

  const int T = req.source.frames();
  const ContentEmbedding content = net.encode_content(req.source).second;
  if (trace) trace->content_inputs.push_back("source");

  SpeakerEmbedding speaker = net.encode_speaker(req.targets.front(), T);
  if (trace) trace->speaker_inputs.push_back("target");
  if (req.targets.size() > 1) {
    for (std::size_t i = 1; i < req.targets.size(); ++i) {
      speaker.vector += net.encode_speaker(req.targets[i], 1).vector;
      if (trace) trace->speaker_inputs.push_back("target");
    }
    speaker.vector /= static_cast<Real>(req.targets.size());
    speaker.replicated = speaker.vector.replicate(T, 1);
  }
  MelSpectrogram out = net.decode(content, speaker);
  out.hop_samples = req.source.hop_samples;
  out.window_samples = req.source.window_samples;
  out.sample_rate = req.source.sample_rate;
  return out;
}

AudioClip invert_mel(const MelSpectrogram &mel, int n_iters, std::uint64_t seed) {
  if (n_iters < 1) throw ConfigError("invert_mel: iterations must be >= 1");
  if (mel.frames() < 1) throw ShapeError("invert_mel: empty spectrogram");
  MelConfig cfg;
  cfg.sample_rate = mel.sample_rate;
  cfg.window_samples = mel.window_samples;
  cfg.hop_samples = mel.hop_samples;
  cfg.n_mels = mel.n_mels();

  // Energy at the log floor is treated as silence.
  const Matrix mel_mag = (mel.values.array().exp() - cfg.log_floor).max(0.0).matrix();
  const Matrix fb = mel_filterbank(cfg);
  const Matrix pinv = fb.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix mag = (pinv * mel_mag).cwiseMax(0.0).transpose();  // frames x bins

  Rng rng(derive_seed(seed, 0x611));
  ComplexMatrix spec(mag.rows(), mag.cols());
  for (Eigen::Index i = 0; i < spec.size(); ++i)
    spec.data()[i] = std::polar(mag.data()[i], uniform(rng, -M_PI, M_PI));

  std::vector<double> wave;
  for (int it = 0; it < n_iters; ++it) {
    wave = istft(spec, cfg);
    const ComplexMatrix est = stft(wave, cfg);
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      const std::complex<double> z = est.data()[i];
      const double a = std::abs(z);
      spec.data()[i] = a > 1e-12 ? mag.data()[i] * (z / a) : std::complex<double>(mag.data()[i], 0.0);
    }
  }
  wave = istft(spec, cfg);
  AudioClip clip;
  clip.samples = std::move(wave);
  clip.sample_rate = cfg.sample_rate;
  return clip;
}

MelSpectrogram load_mel_or_wav(const std::filesystem::path &path, const MelConfig &cfg) {
  if (path.extension() == ".wav") {
    const AudioClip clip = trim_silence(load_and_resample(path, cfg.sample_rate));
    return mel_spectrogram(clip, cfg);
  }
  return read_mel(path, cfg);
}

}  // namespace noisevc
