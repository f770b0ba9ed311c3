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

#include "spira/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace spira {

FeatureLayout layout_from_string(const std::string& s) {
  if (s == "spec_only") return FeatureLayout::spec_only;
  if (s == "meta_only") return FeatureLayout::meta_only;
  if (s == "full") return FeatureLayout::full;
  throw std::runtime_error("unknown layout token: '" + s + "'");
}

std::string to_string(FeatureLayout l) {
  switch (l) {
    case FeatureLayout::spec_only: return "spec_only";
    case FeatureLayout::meta_only: return "meta_only";
    case FeatureLayout::full: return "full";
  }
  return "?";
}

int layout_rows(FeatureLayout l) {
  switch (l) {
    case FeatureLayout::spec_only: return kSpecRows;
    case FeatureLayout::meta_only: return kMetaRows;
    case FeatureLayout::full: return kFullRows;
  }
  return 0;
}

MetaNorm normalize_meta(const SpeakerRecord& rec, const PitchTrack& pitch) {
  MetaNorm n;
  n.age_norm = std::clamp(rec.age / 100.0, 0.0, 1.0);
  n.f0std_norm = std::clamp(pitch.f0_std / 100.0, 0.0, 1.0);
  n.f0_norm.resize(pitch.f0.size());
  for (std::size_t i = 0; i < pitch.f0.size(); ++i) {
    n.f0_norm[i] = std::clamp(pitch.f0[i] / 500.0, 0.0, 1.0);
  }
  return n;
}

namespace {

void fill_meta_rows(Mat& values, int row0, const MetaNorm& meta, int sex) {
  // Scalar strip: age | F0-STD | sex, left to right.
  for (int r = row0; r < row0 + kStripRows; ++r) {
    for (int c = 0; c < kAgeCols; ++c) values(r, c) = meta.age_norm;
    for (int c = kAgeCols; c < kAgeCols + kF0StdCols; ++c) values(r, c) = meta.f0std_norm;
    for (int c = kAgeCols + kF0StdCols; c < kMetaFrames; ++c) {
      values(r, c) = static_cast<double>(sex);
    }
  }
  // F0 barcode: each frame's value repeated down the column.
  for (int r = row0 + kStripRows; r < row0 + kMetaRows; ++r) {
    for (int c = 0; c < kMetaFrames; ++c) {
      values(r, c) = meta.f0_norm[static_cast<std::size_t>(c)];
    }
  }
}

}  // namespace

FeatureMatrix assemble(const MelSpectrogram* mel, const PitchTrack* pitch,
                       const SpeakerRecord* rec, FeatureLayout layout) {
  const bool needs_spec = layout != FeatureLayout::meta_only;
  const bool needs_meta = layout != FeatureLayout::spec_only;
  if (needs_spec && mel == nullptr) {
    throw std::invalid_argument("assemble: layout requires a mel spectrogram");
  }
  if (needs_meta && (pitch == nullptr || rec == nullptr)) {
    throw std::invalid_argument("assemble: layout requires pitch track and speaker record");
  }

  FeatureMatrix fm;
  fm.layout = layout;

  if (layout == FeatureLayout::spec_only) {
    fm.values = Mat(mel->values.rows, mel->values.cols);
  } else {
    if (needs_spec && (mel->values.rows != kSpecRows || mel->values.cols != kMetaFrames)) {
      throw std::invalid_argument("assemble: full layout needs an 80x401 mel");
    }
    const int frames = static_cast<int>(pitch->f0.size());
    if (frames != kMetaFrames) {
      throw std::invalid_argument("assemble: meta layouts need 401 frames, got " +
                                  std::to_string(frames));
    }
    fm.values = Mat(layout_rows(layout), kMetaFrames);
  }

  if (needs_spec) {
    const Mat& src = mel->values;
    fm.spec_min = src.min_value();
    fm.spec_max = src.max_value();
    const double span = fm.spec_max - fm.spec_min;
    for (int r = 0; r < src.rows; ++r) {
      for (int c = 0; c < src.cols; ++c) {
        fm.values(r, c) = span > 0 ? (src(r, c) - fm.spec_min) / span : 0.0;
      }
    }
  }

  if (needs_meta) {
    const MetaNorm meta = normalize_meta(*rec, *pitch);
    const int row0 = layout == FeatureLayout::full ? kSpecRows : 0;
    fill_meta_rows(fm.values, row0, meta, rec->sex);
  }
  return fm;
}

}  // namespace spira
