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

#include "noisevc/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "noisevc/error.hpp"
#include "noisevc/tensor_io.hpp"

namespace noisevc {

namespace fs = std::filesystem;

namespace {

std::uint32_t le32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t le16(const unsigned char *p) { return p[0] | (p[1] << 8); }

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

AudioClip read_wav(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read audio file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  auto fail = [&](const std::string &why) {
    throw DataError("corrupt audio file " + path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail("missing RIFF/WAVE header");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + 16 > bytes.size()) fail("short fmt chunk");
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (format == 0xFFFE && len >= 26) format = le16(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(len, bytes.size() - body);
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0 || rate == 0) fail("missing fmt chunk");
  if (!data) fail("missing data chunk");
  if (format != 1 && format != 3) fail("unsupported sample format");
  if (format == 1 && bits != 8 && bits != 16 && bits != 24 && bits != 32)
    fail("unsupported PCM bit depth");
  if (format == 3 && bits != 32 && bits != 64) fail("unsupported float width");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.utterance_id = path.stem().string();
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char *p = data + (f * channels + c) * width;
      double v = 0.0;
      if (format == 3) {
        if (bits == 32) {
          float x;
          std::memcpy(&x, p, 4);
          v = x;
        } else {
          double x;
          std::memcpy(&x, p, 8);
          v = x;
        }
      } else if (bits == 8) {
        v = (static_cast<int>(p[0]) - 128) / 128.0;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t x = p[0] | (p[1] << 8) | (p[2] << 16);
        if (x & 0x800000) x |= ~0xFFFFFF;
        v = x / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(le32(p)) / 2147483648.0;
      }
      acc += v;
    }
    clip.samples[f] = acc / channels;
  }
  for (double v : clip.samples)
    if (!std::isfinite(v)) fail("non-finite sample");
  return clip;
}

void write_wav(const fs::path &path, const AudioClip &clip) {
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  std::string out;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
  };
  out += "RIFF";
  u32(36 + 2 * n);
  out += "WAVEfmt ";
  u32(16);
  u16(1);
  u16(1);
  u32(static_cast<std::uint32_t>(clip.sample_rate));
  u32(static_cast<std::uint32_t>(clip.sample_rate) * 2);
  u16(2);
  u16(16);
  out += "data";
  u32(2 * n);
  for (double s : clip.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  write_file_atomic(path, out);
}

std::vector<double> resample(const std::vector<double> &in, int from_rate,
                             int to_rate) {
  if (from_rate <= 0 || to_rate <= 0)
    throw DataError("sample rates must be positive");
  if (from_rate == to_rate || in.empty()) return in;

  const double ratio = static_cast<double>(to_rate) / from_rate;
  const double cutoff = std::min(1.0, ratio) * 0.97;
  constexpr int kZeroCrossings = 32;
  constexpr double kBeta = 8.6;
  const double half_width = kZeroCrossings / cutoff;  // in input samples
  const double i0_beta = bessel_i0(kBeta);

  const std::size_t n_out = static_cast<std::size_t>(
      std::ceil(static_cast<double>(in.size()) * to_rate / from_rate));
  std::vector<double> out(n_out);
  const long n_in = static_cast<long>(in.size());
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = static_cast<double>(i) * from_rate / to_rate;
    const long lo = static_cast<long>(std::ceil(t - half_width));
    const long hi = static_cast<long>(std::floor(t + half_width));
    double acc = 0.0;
    for (long k = std::max(0L, lo); k <= std::min(n_in - 1, hi); ++k) {
      const double x = t - static_cast<double>(k);
      const double r = x / half_width;
      if (r <= -1.0 || r >= 1.0) continue;
      const double arg = M_PI * cutoff * x;
      const double sinc = (x == 0.0) ? 1.0 : std::sin(arg) / arg;
      const double win = bessel_i0(kBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      acc += in[static_cast<std::size_t>(k)] * cutoff * sinc * win;
    }
    out[i] = acc;
  }
  return out;
}

AudioClip load_and_resample(const fs::path &path, int target_rate) {
  AudioClip clip = read_wav(path);
  if (clip.samples.empty()) throw EmptyClipError("empty audio clip: " + path.string());
  clip.samples = resample(clip.samples, clip.sample_rate, target_rate);
  clip.sample_rate = target_rate;
  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0)
    for (double &v : clip.samples) v /= peak;
  return clip;
}

AudioClip trim_silence(const AudioClip &clip, const TrimOptions &opts) {
  if (clip.samples.empty()) throw EmptyClipError("cannot trim an empty clip");
  const std::size_t frame = static_cast<std::size_t>(opts.frame_samples);
  const std::size_t n = clip.samples.size();
  const std::size_t n_frames = (n + frame - 1) / frame;
  std::vector<double> rms(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t a = f * frame, b = std::min(n, a + frame);
    double e = 0.0;
    for (std::size_t i = a; i < b; ++i) e += clip.samples[i] * clip.samples[i];
    rms[f] = std::sqrt(e / static_cast<double>(b - a));
  }
  // Reference is the peak sample, which trimming never removes, so a second
  // pass sees the same threshold.
  double ref = 0.0;
  for (double v : clip.samples) ref = std::max(ref, std::abs(v));
  if (ref <= 0.0) throw EmptyClipError("clip is entirely silent");
  const double thresh = ref * std::pow(10.0, opts.threshold_db / 20.0);
  std::size_t first = 0, last = n_frames;
  while (first < n_frames && rms[first] < thresh) ++first;
  while (last > first && rms[last - 1] < thresh) --last;
  if (first >= last) throw EmptyClipError("clip is entirely below threshold");

  // Refine the edges to the first and last loud samples of the boundary frames.
  std::size_t a = first * frame, b = std::min(n, last * frame);
  while (a < b && std::abs(clip.samples[a]) < thresh) ++a;
  while (b > a && std::abs(clip.samples[b - 1]) < thresh) --b;
  AudioClip out = clip;
  out.samples.assign(clip.samples.begin() + static_cast<long>(a),
                     clip.samples.begin() + static_cast<long>(b));
  return out;
}

}  // namespace noisevc
