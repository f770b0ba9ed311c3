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

#ifndef SPIRA_DSP_HPP_
#define SPIRA_DSP_HPP_

#include <cstdint>
#include <vector>

#include "spira/audio.hpp"
#include "spira/mat.hpp"

namespace spira {

/// Spectrogram extraction settings. Two presets are used throughout:
/// set1 (hop 160, 601 freq bins, 80 mels, win 400) and set2 (hop 320,
/// 513 freq bins, 64 mels, win 1024).
struct SpectroConfig {
  int n_fft = 1200;
  int hop = 160;
  int win_len = 400;
  int n_mels = 80;
  int sample_rate = kPipelineRate;
  double log_floor = 1e-10;

  int n_freq() const { return n_fft / 2 + 1; }
  void validate() const;

  static SpectroConfig set1();
  static SpectroConfig set2();
  static SpectroConfig preset(int set);
};

/// Magnitude/phase STFT pair; kept separate so heat-map masking can touch
/// magnitude while resynthesis reuses the original phase.
struct ComplexSpectrogram {
  Mat magnitude;  // [n_freq x frames], >= 0
  Mat phase;      // [n_freq x frames], radians
  int frames() const { return magnitude.cols; }
};

struct MelSpectrogram {
  Mat values;  // [n_mels x frames], natural log of floored mel magnitudes
  SpectroConfig config;
  int frames() const { return values.cols; }
};

struct PitchTrack {
  std::vector<double> f0;  // Hz per frame, 0 = unvoiced
  double f0_std = 0.0;     // over voiced frames
  bool all_unvoiced = false;
};

/// Frame count under centered framing: floor(n / hop) + 1.
int stft_frames(std::size_t n_samples, const SpectroConfig& cfg);

/// Centered STFT: the signal is reflect-padded by n_fft/2 on each side and
/// analyzed with a Hann window of win_len zero-centered inside the n_fft
/// frame.
ComplexSpectrogram stft(const AudioClip& clip, const SpectroConfig& cfg);

/// Least-squares overlap-add inverse of stft(). Output length defaults to
/// (frames - 1) * hop; pass the original sample count to recover it exactly.
AudioClip istft(const ComplexSpectrogram& spec, const SpectroConfig& cfg,
                std::int64_t length_hint = -1);

/// Triangular mel filterbank [n_mels x n_freq] on the HTK scale
/// (2595 * log10(1 + f/700)). Triangles are averaged over each bin's
/// frequency cell so every bin in [0, sr/2] has nonzero coverage; rows are
/// L1-normalized.
Mat mel_filterbank(const SpectroConfig& cfg);

/// Peak frequencies of the filters, strictly increasing.
std::vector<double> mel_center_freqs(const SpectroConfig& cfg);

/// values = ln(max(filterbank * magnitude, log_floor)).
MelSpectrogram log_mel(const ComplexSpectrogram& spec, const SpectroConfig& cfg);

/// Approximate inverse: linear magnitude via the Moore-Penrose pseudo-inverse
/// of the filterbank (negatives clamped to zero), combined with the given
/// phase and run through istft().
AudioClip inverse_log_mel(const MelSpectrogram& mel, const Mat& phase,
                          const SpectroConfig& cfg,
                          std::int64_t length_hint = -1);

/// YIN pitch tracking on the stft() frame grid: difference function,
/// cumulative mean normalization, absolute threshold 0.15, parabolic
/// interpolation. Frames whose aperiodicity exceeds the threshold are 0.
PitchTrack estimate_f0(const AudioClip& clip, const SpectroConfig& cfg,
                       double f0_min, double f0_max);

}  // namespace spira

#endif  // SPIRA_DSP_HPP_
