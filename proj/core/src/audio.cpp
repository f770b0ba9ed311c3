// Copyright 2026 The Spira Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spira/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spira {

namespace {

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t x) {
  const char b[4] = {static_cast<char>(x & 0xff), static_cast<char>((x >> 8) & 0xff),
                     static_cast<char>((x >> 16) & 0xff), static_cast<char>((x >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t x) {
  const char b[2] = {static_cast<char>(x & 0xff), static_cast<char>((x >> 8) & 0xff)};
  out.write(b, 2);
}

// Modified Bessel function of the first kind, order zero (series form).
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) {
    throw std::runtime_error("malformed WAV header (no RIFF): " + path);
  }
  read_u32(in);  // overall size, unused
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) {
    throw std::runtime_error("malformed WAV header (no WAVE): " + path);
  }

  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::vector<std::int16_t> raw;

  while (in) {
    in.read(tag, 4);
    if (!in) break;
    const std::uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format_tag = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("malformed WAV: data before fmt: " + path);
      raw.resize(chunk_size / 2);
      in.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * 2));
      if (!in) throw std::runtime_error("truncated WAV data chunk: " + path);
      break;
    } else {
      // Skip unknown chunks (LIST, fact, ...). Chunks are word aligned.
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }

  if (!have_fmt) throw std::runtime_error("malformed WAV: missing fmt chunk: " + path);
  if (format_tag != 1 || bits != 16) {
    throw std::runtime_error("unsupported WAV encoding (format tag " +
                             std::to_string(format_tag) + ", " + std::to_string(bits) +
                             " bits): " + path);
  }
  if (channels != 1 && channels != 2) {
    throw std::runtime_error("unsupported channel count " + std::to_string(channels) +
                             ": " + path);
  }

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.source_id = path;
  const std::size_t frames = raw.size() / channels;
  clip.samples.resize(frames);
  constexpr double kScale = 1.0 / 32768.0;
  if (channels == 1) {
    for (std::size_t i = 0; i < frames; ++i) clip.samples[i] = raw[i] * kScale;
  } else {
    for (std::size_t i = 0; i < frames; ++i) {
      clip.samples[i] = 0.5 * (raw[2 * i] + raw[2 * i + 1]) * kScale;
    }
  }
  return clip;
}

WavWriteStats write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.samples.empty()) throw std::invalid_argument("write_wav: empty clip");
  if (clip.sample_rate <= 0) throw std::invalid_argument("write_wav: bad sample rate");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * 2;
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);

  WavWriteStats stats;
  std::vector<std::int16_t> raw(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = clip.samples[i];
    if (x > 1.0 || x < -1.0) ++stats.clipped;
    const long q = std::lround(std::clamp(x, -1.0, 1.0) * 32768.0);
    raw[i] = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), data_bytes);
  if (!out) throw std::runtime_error("short write: " + path);
  return stats;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (clip.sample_rate <= 0) throw std::invalid_argument("resample: source rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  constexpr int kTaps = 64;
  constexpr double kKaiserBeta = 8.6;
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  // Cutoff at the narrower of the two Nyquist bands (anti-aliasing on
  // downsample), normalized to the source rate.
  const double cutoff = 0.5 * std::min(1.0, ratio);

  const auto n_in = static_cast<std::int64_t>(clip.samples.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * ratio));

  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.samples.resize(static_cast<std::size_t>(n_out));

  const double i0_beta = bessel_i0(kKaiserBeta);
  const int half = kTaps / 2;
  for (std::int64_t n = 0; n < n_out; ++n) {
    const double pos = static_cast<double>(n) / ratio;
    const auto center = static_cast<std::int64_t>(std::floor(pos));
    double acc = 0.0;
    for (std::int64_t m = center - half + 1; m <= center + half; ++m) {
      if (m < 0 || m >= n_in) continue;
      const double t = pos - static_cast<double>(m);
      // Kaiser-windowed sinc, gain-compensated for the cutoff.
      const double u = t / half;
      if (u <= -1.0 || u >= 1.0) continue;
      const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      const double arg = 2.0 * M_PI * cutoff * t;
      const double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
      acc += clip.samples[static_cast<std::size_t>(m)] * (2.0 * cutoff * sinc * window);
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

}  // namespace spira
