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

#include "spira/augment.hpp"

#include <stdexcept>

namespace spira {

std::pair<FeatureMatrix, std::array<double, 2>> mixup(
    const FeatureMatrix& x_i, const std::array<double, 2>& y_i,
    const FeatureMatrix& x_j, const std::array<double, 2>& y_j, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("mixup: lambda must be in [0,1]");
  }
  if (!x_i.values.same_shape(x_j.values) || x_i.layout != x_j.layout) {
    throw std::invalid_argument("mixup: shape mismatch");
  }
  FeatureMatrix out = x_i;
  const double mu = 1.0 - lambda;
  for (std::size_t k = 0; k < out.values.v.size(); ++k) {
    out.values.v[k] = lambda * x_i.values.v[k] + mu * x_j.values.v[k];
  }
  out.spec_min = lambda * x_i.spec_min + mu * x_j.spec_min;
  out.spec_max = lambda * x_i.spec_max + mu * x_j.spec_max;
  return {std::move(out),
          {lambda * y_i[0] + mu * y_j[0], lambda * y_i[1] + mu * y_j[1]}};
}

double draw_lambda(const MixupConfig& cfg, Rng& rng) {
  if (!(cfg.alpha > 0)) throw std::invalid_argument("mixup: alpha must be positive");
  return rng.beta(cfg.alpha, cfg.alpha);
}

MelSpectrogram spec_augment(const MelSpectrogram& mel, const SpecAugmentConfig& cfg,
                            Rng& rng) {
  const int v = mel.values.rows;
  const int frames = mel.values.cols;
  if (cfg.F < 0 || cfg.F >= v || cfg.T < 0 || cfg.T >= frames ||
      cfg.n_freq_masks < 0 || cfg.n_time_masks < 0) {
    throw std::invalid_argument("spec_augment: config out of range for this matrix");
  }

  MelSpectrogram out = mel;
  const double fill = mel.values.mean_value();
  for (int m = 0; m < cfg.n_freq_masks; ++m) {
    const int f = static_cast<int>(rng.uniform_int(cfg.F + 1));
    const int f0 = static_cast<int>(rng.uniform_int(v - f + 1));
    for (int r = f0; r < f0 + f; ++r) {
      for (int c = 0; c < frames; ++c) out.values(r, c) = fill;
    }
  }
  for (int m = 0; m < cfg.n_time_masks; ++m) {
    const int t = static_cast<int>(rng.uniform_int(cfg.T + 1));
    const int t0 = static_cast<int>(rng.uniform_int(frames - t + 1));
    for (int r = 0; r < v; ++r) {
      for (int c = t0; c < t0 + t; ++c) out.values(r, c) = fill;
    }
  }
  return out;
}

}  // namespace spira
