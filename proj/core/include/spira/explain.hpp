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

#ifndef SPIRA_EXPLAIN_HPP_
#define SPIRA_EXPLAIN_HPP_

#include <optional>
#include <string>
#include <vector>

#include "spira/features.hpp"
#include "spira/model.hpp"

namespace spira {

/// Grad-CAM relevance map aligned to the model input grid, in [0, 1].
struct HeatMap {
  Mat values;
  std::string target_layer;
  Label class_sign = Label::patient;
  bool all_zero = false;  // set when no positive evidence survived the ReLU
};

/// Channel weights are the spatially averaged gradients of (signed) logit
/// w.r.t. the target layer's activations; the weighted sum is ReLU'd,
/// bilinearly upsampled to the input shape and max-normalized.
HeatMap grad_cam(const ModelState& state, const FeatureMatrix& x,
                 const std::string& target_layer, Label class_sign);

/// Last conv block, the usual Grad-CAM target.
std::string default_target_layer(const ModelConfig& cfg);

Mat bilinear_upsample(const Mat& m, int out_rows, int out_cols);

/// Hadamard masking: the log-mel is min-max normalized, multiplied by the
/// heat values, then mapped back to the original range.
MelSpectrogram apply_heatmap(const MelSpectrogram& mel, const Mat& heat_region);

/// Resynthesizes the masked spectrogram with the window's original phase;
/// output peak-normalized to 0.9.
AudioClip sonify(const MelSpectrogram& modified, const Mat& phase,
                 const SpectroConfig& cfg, std::int64_t length_hint = -1);

/// Writes <prefix>_original.pgm / _heat.pgm / _modified.pgm plus a sidecar
/// <prefix>_scale.txt recording the grey scaling. The modified panel reuses
/// the original's range so masking reads as darkening.
void export_panel(const MelSpectrogram& original, const HeatMap& heat,
                  const MelSpectrogram& modified, const std::string& prefix);

/// Mean attention per input region, for the layouts that carry the region.
struct AttentionRow {
  std::string window_id;
  Label predicted = Label::control;
  std::optional<double> spec, age, f0std, sex, f0;
};

AttentionRow attention_summary(const HeatMap& heat, FeatureLayout layout,
                               const std::string& window_id, Label predicted);
void write_attention_csv(const std::vector<AttentionRow>& rows,
                         const std::string& path);

}  // namespace spira

#endif  // SPIRA_EXPLAIN_HPP_
