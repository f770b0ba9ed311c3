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

#include "spira/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "spira/export.hpp"

namespace spira {

std::string default_target_layer(const ModelConfig& cfg) {
  return "block" + std::to_string(cfg.conv_blocks.size());
}

Mat bilinear_upsample(const Mat& m, int out_rows, int out_cols) {
  if (m.rows < 1 || m.cols < 1 || out_rows < 1 || out_cols < 1) {
    throw std::invalid_argument("bilinear_upsample: empty shape");
  }
  Mat out(out_rows, out_cols);
  const double rs = out_rows > 1 ? static_cast<double>(m.rows - 1) / (out_rows - 1) : 0.0;
  const double cs = out_cols > 1 ? static_cast<double>(m.cols - 1) / (out_cols - 1) : 0.0;
  for (int r = 0; r < out_rows; ++r) {
    const double fr = r * rs;
    const int r0 = static_cast<int>(fr);
    const int r1 = std::min(r0 + 1, m.rows - 1);
    const double tr = fr - r0;
    for (int c = 0; c < out_cols; ++c) {
      const double fc = c * cs;
      const int c0 = static_cast<int>(fc);
      const int c1 = std::min(c0 + 1, m.cols - 1);
      const double tc = fc - c0;
      out(r, c) = (1 - tr) * ((1 - tc) * m(r0, c0) + tc * m(r0, c1)) +
                  tr * ((1 - tc) * m(r1, c0) + tc * m(r1, c1));
    }
  }
  return out;
}

HeatMap grad_cam(const ModelState& state, const FeatureMatrix& x,
                 const std::string& target_layer, Label class_sign) {
  const TapedForward taped = forward(state, x, Mode::eval);
  auto fm = taped.feature_maps.find(target_layer);
  if (fm == taped.feature_maps.end()) {
    throw std::invalid_argument("grad_cam: unknown layer '" + target_layer + "'");
  }
  const double sign = class_sign == Label::patient ? 1.0 : -1.0;
  const Gradients grads = backward(state, taped, sign);
  const nn::Tensor& maps = fm->second;                       // [C,H,W]
  const nn::Tensor& dmaps = grads.feature_maps.at(target_layer);

  const int ch = maps.dim(0);
  const int h = maps.dim(1);
  const int w = maps.dim(2);
  const double hw = static_cast<double>(h) * w;

  // alpha_k: spatial mean of the gradient; map = ReLU(sum_k alpha_k A_k).
  Mat raw(h, w);
  for (int c = 0; c < ch; ++c) {
    double alpha = 0.0;
    const std::size_t base = static_cast<std::size_t>(c) * h * w;
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) {
      alpha += dmaps.v[base + i];
    }
    alpha /= hw;
    for (int y = 0; y < h; ++y) {
      for (int z = 0; z < w; ++z) {
        raw(y, z) += alpha * maps.v[base + static_cast<std::size_t>(y) * w + z];
      }
    }
  }
  for (double& e : raw.v) e = std::max(e, 0.0);

  HeatMap heat;
  heat.target_layer = target_layer;
  heat.class_sign = class_sign;
  heat.values = bilinear_upsample(raw, x.values.rows, x.values.cols);
  const double peak = heat.values.max_value();
  if (peak > 0.0) {
    for (double& e : heat.values.v) e /= peak;
  } else {
    heat.all_zero = true;
    for (double& e : heat.values.v) e = 0.0;
  }
  return heat;
}

MelSpectrogram apply_heatmap(const MelSpectrogram& mel, const Mat& heat_region) {
  if (!mel.values.same_shape(heat_region)) {
    throw std::invalid_argument("apply_heatmap: shape mismatch");
  }
  const double lo = mel.values.min_value();
  const double hi = mel.values.max_value();
  const double span = hi - lo;
  MelSpectrogram out = mel;
  for (std::size_t i = 0; i < out.values.v.size(); ++i) {
    const double norm = span > 0 ? (mel.values.v[i] - lo) / span : 0.0;
    out.values.v[i] = lo + span * (norm * heat_region.v[i]);
  }
  return out;
}

AudioClip sonify(const MelSpectrogram& modified, const Mat& phase,
                 const SpectroConfig& cfg, std::int64_t length_hint) {
  AudioClip clip = inverse_log_mel(modified, phase, cfg, length_hint);
  double peak = 0.0;
  for (const double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    const double k = 0.9 / peak;
    for (double& s : clip.samples) s *= k;
  }
  return clip;
}

void export_panel(const MelSpectrogram& original, const HeatMap& heat,
                  const MelSpectrogram& modified, const std::string& prefix) {
  const double lo = original.values.min_value();
  const double hi = original.values.max_value();
  write_pgm(original.values, prefix + "_original.pgm");
  write_pgm_unit(heat.values, prefix + "_heat.pgm");
  // Reuse the original's range so masked cells read as darkening.
  {
    Mat scaled = modified.values;
    const double span = hi - lo;
    for (double& e : scaled.v) e = span > 0 ? (e - lo) / span : 0.0;
    write_pgm_unit(scaled, prefix + "_modified.pgm");
  }
  std::ofstream side(prefix + "_scale.txt");
  if (!side) throw std::runtime_error("cannot write sidecar: " + prefix);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "original_min=%.9g\noriginal_max=%.9g\n", lo, hi);
  side << buf;
  side << "heat_scale=unit\nmodified_scale=original_range\n";
  side << "target_layer=" << heat.target_layer << "\n";
  side << "class_sign=" << to_string(heat.class_sign) << "\n";
}

namespace {

double region_mean(const Mat& m, int r0, int r1, int c0, int c1) {
  double s = 0.0;
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) s += m(r, c);
  }
  return s / (static_cast<double>(r1 - r0) * (c1 - c0));
}

}  // namespace

AttentionRow attention_summary(const HeatMap& heat, FeatureLayout layout,
                               const std::string& window_id, Label predicted) {
  AttentionRow row;
  row.window_id = window_id;
  row.predicted = predicted;
  const Mat& m = heat.values;
  if (layout != FeatureLayout::meta_only) {
    row.spec = region_mean(m, 0, std::min(kSpecRows, m.rows), 0, m.cols);
  }
  if (layout != FeatureLayout::spec_only) {
    const int strip0 = layout == FeatureLayout::full ? kSpecRows : 0;
    const int bar0 = strip0 + kStripRows;
    row.age = region_mean(m, strip0, strip0 + kStripRows, 0, kAgeCols);
    row.f0std = region_mean(m, strip0, strip0 + kStripRows, kAgeCols,
                            kAgeCols + kF0StdCols);
    row.sex = region_mean(m, strip0, strip0 + kStripRows, kAgeCols + kF0StdCols,
                          kMetaFrames);
    row.f0 = region_mean(m, bar0, bar0 + kBarcodeRows, 0, kMetaFrames);
  }
  return row;
}

void write_attention_csv(const std::vector<AttentionRow>& rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write attention csv: " + path);
  out << "window_id,predicted_class,mean_attn_spec,mean_attn_age,mean_attn_f0std,"
         "mean_attn_sex,mean_attn_f0\n";
  char buf[48];
  auto field = [&](std::optional<double> v) {
    if (!v) return std::string();
    std::snprintf(buf, sizeof(buf), "%.9g", *v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.window_id << ',' << to_string(r.predicted) << ',' << field(r.spec) << ','
        << field(r.age) << ',' << field(r.f0std) << ',' << field(r.sex) << ','
        << field(r.f0) << '\n';
  }
}

}  // namespace spira
