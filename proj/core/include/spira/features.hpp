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

#ifndef SPIRA_FEATURES_HPP_
#define SPIRA_FEATURES_HPP_

#include "spira/corpus.hpp"
#include "spira/dsp.hpp"
#include "spira/mat.hpp"

namespace spira {

/// Composite input geometry. The full form stacks, top to bottom: the
/// min-max normalized spectrogram (80 rows), a 20-row scalar strip split
/// into age (133 cols) | F0-STD (135) | sex (133), and a 20-row F0 barcode
/// where each column repeats that frame's normalized F0.
enum class FeatureLayout { spec_only, meta_only, full };

inline constexpr int kSpecRows = 80;
inline constexpr int kStripRows = 20;
inline constexpr int kBarcodeRows = 20;
inline constexpr int kMetaRows = kStripRows + kBarcodeRows;
inline constexpr int kFullRows = kSpecRows + kMetaRows;
inline constexpr int kMetaFrames = 401;
inline constexpr int kAgeCols = 133;
inline constexpr int kF0StdCols = 135;
inline constexpr int kSexCols = 133;
static_assert(kAgeCols + kF0StdCols + kSexCols == kMetaFrames);

FeatureLayout layout_from_string(const std::string& s);
std::string to_string(FeatureLayout l);

/// Rows the layout occupies at the 401-frame geometry (spec_only adapts to
/// the mel config instead).
int layout_rows(FeatureLayout l);

struct FeatureMatrix {
  Mat values;
  FeatureLayout layout = FeatureLayout::spec_only;
  // Min-max bounds of the source log-mel, kept so the spectrogram region can
  // be un-normalized later.
  double spec_min = 0.0;
  double spec_max = 0.0;
};

struct MetaNorm {
  double age_norm = 0.0;    // age / 100 yr, clipped to [0,1]
  double f0std_norm = 0.0;  // f0_std / 100 Hz, clipped
  std::vector<double> f0_norm;  // per frame, f0 / 500 Hz, clipped; unvoiced 0
};

MetaNorm normalize_meta(const SpeakerRecord& rec, const PitchTrack& pitch);

/// Builds the layout from the parts it needs; pass nullptr for unused ones.
/// meta layouts require exactly 401 frames; spec layouts take the mel shape
/// as-is (set 2 yields 64x201).
FeatureMatrix assemble(const MelSpectrogram* mel, const PitchTrack* pitch,
                       const SpeakerRecord* rec, FeatureLayout layout);

}  // namespace spira

#endif  // SPIRA_FEATURES_HPP_
