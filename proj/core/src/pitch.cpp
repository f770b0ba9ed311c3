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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsp_internal.hpp"
#include "spira/dsp.hpp"

namespace spira {

namespace {

constexpr double kYinThreshold = 0.15;

// Parabolic refinement of the minimum of d' around tau.
double parabolic_min(const std::vector<double>& d, int tau) {
  const int x0 = tau > 0 ? tau - 1 : tau;
  const int x2 = tau + 1 < static_cast<int>(d.size()) ? tau + 1 : tau;
  if (x0 == tau || x2 == tau) return static_cast<double>(tau);
  const double s0 = d[static_cast<std::size_t>(x0)];
  const double s1 = d[static_cast<std::size_t>(tau)];
  const double s2 = d[static_cast<std::size_t>(x2)];
  const double denom = 2.0 * (2.0 * s1 - s2 - s0);
  if (denom == 0.0) return static_cast<double>(tau);
  return tau + (s2 - s0) / denom;
}

}  // namespace

PitchTrack estimate_f0(const AudioClip& clip, const SpectroConfig& cfg,
                       double f0_min, double f0_max) {
  cfg.validate();
  if (clip.samples.empty()) throw std::invalid_argument("estimate_f0: empty clip");
  if (!(f0_min > 0) || !(f0_min < f0_max) || !(f0_max < cfg.sample_rate / 2.0)) {
    throw std::invalid_argument("estimate_f0: need 0 < f0_min < f0_max < sr/2");
  }

  const double sr = cfg.sample_rate;
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / f0_max)));
  const int tau_max = static_cast<int>(std::ceil(sr / f0_min));
  if (tau_max <= tau_min + 2) {
    throw std::invalid_argument("estimate_f0: pitch range too narrow for this rate");
  }

  // Integration window equal to the largest admissible period; the analysis
  // block is centered on the same grid stft() uses.
  const int integ = tau_max;
  const int block = integ + tau_max;
  const int frames = stft_frames(clip.samples.size(), cfg);
  const std::vector<double> padded = internal::reflect_pad(clip.samples, block);

  PitchTrack track;
  track.f0.assign(static_cast<std::size_t>(frames), 0.0);

  std::vector<double> d(static_cast<std::size_t>(tau_max) + 1, 0.0);
  std::vector<double> dn(static_cast<std::size_t>(tau_max) + 1, 0.0);

  for (int t = 0; t < frames; ++t) {
    const std::size_t center = static_cast<std::size_t>(t) * cfg.hop + block;
    const std::size_t start = center - static_cast<std::size_t>(block) / 2;
    const double* x = padded.data() + start;

    // Difference function.
    for (int tau = 0; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (int j = 0; j < integ; ++j) {
        const double delta = x[j] - x[j + tau];
        acc += delta * delta;
      }
      d[static_cast<std::size_t>(tau)] = acc;
    }

    // Cumulative mean normalized difference.
    dn[0] = 1.0;
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += d[static_cast<std::size_t>(tau)];
      dn[static_cast<std::size_t>(tau)] =
          running > 0.0 ? d[static_cast<std::size_t>(tau)] * tau / running : 1.0;
    }

    // Absolute threshold: first dip under the threshold, tracked downhill.
    int tau_est = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (dn[static_cast<std::size_t>(tau)] < kYinThreshold) {
        while (tau + 1 <= tau_max &&
               dn[static_cast<std::size_t>(tau) + 1] < dn[static_cast<std::size_t>(tau)]) {
          ++tau;
        }
        tau_est = tau;
        break;
      }
    }
    if (tau_est < 0) continue;  // unvoiced

    const double tau_hat = parabolic_min(dn, tau_est);
    if (tau_hat <= 0.0) continue;
    const double f0 = sr / tau_hat;
    if (f0 < f0_min || f0 > f0_max) continue;
    track.f0[static_cast<std::size_t>(t)] = f0;
  }

  // F0-STD over voiced frames only.
  double sum = 0.0;
  int voiced = 0;
  for (const double f : track.f0) {
    if (f > 0.0) {
      sum += f;
      ++voiced;
    }
  }
  if (voiced == 0) {
    track.all_unvoiced = true;
    track.f0_std = 0.0;
    return track;
  }
  const double mean = sum / voiced;
  double var = 0.0;
  for (const double f : track.f0) {
    if (f > 0.0) var += (f - mean) * (f - mean);
  }
  track.f0_std = std::sqrt(var / voiced);
  return track;
}

}  // namespace spira
