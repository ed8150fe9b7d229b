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

#include "noisevc/mel.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

#include "noisevc/error.hpp"
#include "noisevc/tensor_io.hpp"

namespace noisevc {

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
constexpr double kFSp = 200.0 / 3.0;
constexpr double kMinLogHz = 1000.0;
constexpr double kMinLogMel = kMinLogHz / kFSp;
const double kLogStep = std::log(6.4) / 27.0;

double hz_to_mel(double hz) {
  if (hz < kMinLogHz) return hz / kFSp;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kMinLogMel) return mel * kFSp;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

}  // namespace

double MelConfig::floor_value() const { return std::log(log_floor); }

MelSpectrogram MelSpectrogram::from_time_major(const Matrix &tm, const MelConfig &cfg) {
  MelSpectrogram m;
  m.values = tm.transpose();
  m.hop_samples = cfg.hop_samples;
  m.window_samples = cfg.window_samples;
  m.sample_rate = cfg.sample_rate;
  return m;
}

int frame_count(std::size_t n_samples, const MelConfig &cfg) {
  if (n_samples < static_cast<std::size_t>(cfg.window_samples)) return 0;
  return static_cast<int>((n_samples - cfg.window_samples) / cfg.hop_samples) + 1;
}

Matrix mel_filterbank(const MelConfig &cfg) {
  const int n_bins = cfg.n_bins();
  const double lo = hz_to_mel(cfg.fmin), hi = hz_to_mel(cfg.upper_hz());
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  Matrix fb = Matrix::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
    const double norm = 2.0 / (r - l);
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.window_samples;
      const double w = std::max(0.0, std::min((f - l) / (c - l), (r - f) / (r - c)));
      fb(m, k) = w * norm;
    }
  }
  return fb;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

ComplexMatrix stft(const std::vector<double> &samples, const MelConfig &cfg) {
  const int n_frames = frame_count(samples.size(), cfg);
  const int n_fft = cfg.window_samples;
  const auto win = hann_window(n_fft);
  ComplexMatrix out(n_frames, cfg.n_bins());
  Eigen::FFT<double> fft;
  std::vector<double> buf(n_fft);
  std::vector<std::complex<double>> spec;
  for (int t = 0; t < n_frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop_samples;
    for (int i = 0; i < n_fft; ++i) buf[i] = samples[off + i] * win[i];
    fft.fwd(spec, buf);
    for (int k = 0; k < cfg.n_bins(); ++k) out(t, k) = spec[k];
  }
  return out;
}

std::vector<double> istft(const ComplexMatrix &spec, const MelConfig &cfg) {
  const int n_frames = static_cast<int>(spec.rows());
  const int n_fft = cfg.window_samples;
  const int n_bins = cfg.n_bins();
  if (spec.cols() != n_bins) throw ShapeError("istft: bin count mismatch");
  if (n_frames == 0) return {};
  const auto win = hann_window(n_fft);
  const std::size_t len = static_cast<std::size_t>(n_frames - 1) * cfg.hop_samples + n_fft;
  std::vector<double> out(len, 0.0), norm(len, 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> full(n_fft);
  std::vector<double> frame;
  for (int t = 0; t < n_frames; ++t) {
    for (int k = 0; k < n_bins; ++k) full[k] = spec(t, k);
    for (int k = n_bins; k < n_fft; ++k) full[k] = std::conj(full[n_fft - k]);
    fft.inv(frame, full);
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop_samples;
    for (int i = 0; i < n_fft; ++i) {
      out[off + i] += frame[i] * win[i];
      norm[off + i] += win[i] * win[i];
    }
  }
  for (std::size_t i = 0; i < len; ++i)
    if (norm[i] > 1e-8) out[i] /= norm[i];
  return out;
}

MelSpectrogram mel_spectrogram(const AudioClip &clip, const MelConfig &cfg) {
  if (clip.sample_rate != cfg.sample_rate)
    throw DataError("mel_spectrogram: expected " + std::to_string(cfg.sample_rate) +
                    " Hz audio, got " + std::to_string(clip.sample_rate));
  if (clip.samples.size() < static_cast<std::size_t>(cfg.window_samples))
    throw DataError("clip too short for one analysis window (" +
                    std::to_string(clip.samples.size()) + " < " +
                    std::to_string(cfg.window_samples) + " samples)");
  const ComplexMatrix spec = stft(clip.samples, cfg);
  const Matrix mag = spec.cwiseAbs().cast<double>();
  const Matrix fb = mel_filterbank(cfg);
  MelSpectrogram mel;
  mel.values = (fb * mag.transpose()).array().max(cfg.log_floor).log().matrix();
  mel.hop_samples = cfg.hop_samples;
  mel.window_samples = cfg.window_samples;
  mel.sample_rate = cfg.sample_rate;
  return mel;
}

void write_mel(const std::filesystem::path &path, const MelSpectrogram &mel) {
  write_tensor(path, mel.values, DType::kFloat32);
}

MelSpectrogram read_mel(const std::filesystem::path &path, const MelConfig &cfg) {
  TensorHeader h;
  MelSpectrogram mel;
  mel.values = read_tensor(path, &h);
  if (h.dims.size() != 2)
    throw DataError("mel file must be rank 2: " + path.string());
  if (mel.values.cols() < 1) throw DataError("mel file has no frames: " + path.string());
  if (!mel.values.allFinite())
    throw DataError("mel file contains non-finite values: " + path.string());
  mel.hop_samples = cfg.hop_samples;
  mel.window_samples = cfg.window_samples;
  mel.sample_rate = cfg.sample_rate;
  return mel;
}

}  // namespace noisevc
