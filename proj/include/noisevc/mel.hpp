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

#ifndef NOISEVC_MEL_HPP_
#define NOISEVC_MEL_HPP_

#include <complex>
#include <filesystem>
#include <vector>

#include "noisevc/audio.hpp"
#include "noisevc/tensor.hpp"

namespace noisevc {

struct MelConfig {
  int sample_rate = 22050;
  int window_samples = 1024;  // also the FFT size
  int hop_samples = 128;      // 5.805 ms at 22050 Hz
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 0.0;          // 0 means Nyquist
  double log_floor = 1e-5;

  int n_bins() const { return window_samples / 2 + 1; }
  double upper_hz() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }
  double floor_value() const;
};

struct MelSpectrogram {
  Matrix values;  // n_mels x T, natural-log magnitudes
  int hop_samples = 128;
  int window_samples = 1024;
  int sample_rate = 22050;

  int n_mels() const { return static_cast<int>(values.rows()); }
  int frames() const { return static_cast<int>(values.cols()); }
  // Time-major view used by the network: T x n_mels.
  Matrix time_major() const { return values.transpose(); }
  static MelSpectrogram from_time_major(const Matrix &tm, const MelConfig &cfg = {});
};

// Number of frames produced for `n_samples` with centering off.
int frame_count(std::size_t n_samples, const MelConfig &cfg);

// Slaney-scale triangular filters, area normalized: n_mels x n_bins.
Matrix mel_filterbank(const MelConfig &cfg);

std::vector<double> hann_window(int n);

// Complex STFT, frames x bins, periodic Hann, no centering.
using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
ComplexMatrix stft(const std::vector<double> &samples, const MelConfig &cfg);

// Weighted overlap-add inverse of stft(); returns (T-1)*hop + window samples.
std::vector<double> istft(const ComplexMatrix &spec, const MelConfig &cfg);

MelSpectrogram mel_spectrogram(const AudioClip &clip, const MelConfig &cfg = {});

void write_mel(const std::filesystem::path &path, const MelSpectrogram &mel);
MelSpectrogram read_mel(const std::filesystem::path &path, const MelConfig &cfg = {});

}  // namespace noisevc

#endif  // NOISEVC_MEL_HPP_
