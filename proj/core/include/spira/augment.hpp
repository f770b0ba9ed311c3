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

#ifndef SPIRA_AUGMENT_HPP_
#define SPIRA_AUGMENT_HPP_

#include <array>
#include <utility>

#include "spira/dsp.hpp"
#include "spira/features.hpp"
#include "spira/rng.hpp"

namespace spira {

struct MixupConfig {
  double alpha = 0.2;  // Beta(alpha, alpha) shape
};

struct SpecAugmentConfig {
  int F = 8;            // max masked mel channels per frequency mask
  int T = 20;           // max masked frames per time mask
  int n_freq_masks = 1;
  int n_time_masks = 1;
};

/// x~ = lambda*x_i + (1-lambda)*x_j, y~ = lambda*y_i + (1-lambda)*y_j.
std::pair<FeatureMatrix, std::array<double, 2>> mixup(
    const FeatureMatrix& x_i, const std::array<double, 2>& y_i,
    const FeatureMatrix& x_j, const std::array<double, 2>& y_j, double lambda);

double draw_lambda(const MixupConfig& cfg, Rng& rng);

/// Frequency masks of f ~ U{0..F} rows starting at f0 ~ U{0..v-f}, and the
/// analogous time masks; masked cells take the matrix mean, everything else
/// is copied bit-identically.
MelSpectrogram spec_augment(const MelSpectrogram& mel, const SpecAugmentConfig& cfg,
                            Rng& rng);

}  // namespace spira

#endif  // SPIRA_AUGMENT_HPP_
