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

#include "spira/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace fs = std::filesystem;

namespace spira {

void NoiseBank::validate() const {
  if (clips.size() != channel.size()) {
    throw std::invalid_argument("noise bank: clip/channel size mismatch");
  }
  if (count_patient < 0 || count_control < 0) {
    throw std::invalid_argument("noise bank: negative insertion count");
  }
  if ((count_patient > 0 || count_control > 0) && clips.empty()) {
    throw std::invalid_argument("noise bank: empty bank with positive insertion count");
  }
}

NoiseBank load_noise_bank(const std::string& dir, int count_patient,
                          int count_control) {
  NoiseBank bank;
  bank.count_patient = count_patient;
  bank.count_control = count_control;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("noise bank directory not found: " + dir);
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".wav") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const std::string stem = p.stem().string();
    Label channel;
    if (stem.rfind("hospital", 0) == 0) {
      channel = Label::patient;
    } else if (stem.rfind("domestic", 0) == 0) {
      channel = Label::control;
    } else {
      continue;
    }
    bank.clips.push_back(read_wav(p.string()));
    bank.channel.push_back(channel);
  }
  bank.validate();
  return bank;
}

AudioClip inject_noise(const AudioClip& clip, const NoiseBank& bank, Label label,
                       Rng& rng) {
  bank.validate();
  const int k = bank.count_for(label);
  if (k == 0) return clip;
  if (bank.clips.empty()) {
    throw std::invalid_argument("inject_noise: empty bank with positive count");
  }

  AudioClip out = clip;
  const std::size_t n = out.samples.size();
  for (int draw = 0; draw < k; ++draw) {
    // Three rng words per insertion: clip index, crop offset, gain.
    const auto idx = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(bank.clips.size())));
    const AudioClip& noise = bank.clips[idx];
    const std::size_t len = noise.samples.size();
    const auto offset = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(std::max<std::size_t>(len, 1))));
    const double gain = rng.uniform(0.05, 0.20);
    if (len == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] += gain * noise.samples[(offset + i) % len];  // loop crop
    }
  }
  double peak = 0.0;
  for (const double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    for (double& s : out.samples) s /= peak;
  }
  return out;
}

std::vector<Window> make_windows(const AudioClip& clip, Label label) {
  if (clip.sample_rate <= 0) throw std::invalid_argument("make_windows: bad sample rate");
  const auto sr = static_cast<std::size_t>(clip.sample_rate);
  const std::size_t win = static_cast<std::size_t>(kWindowSeconds * clip.sample_rate);
  const std::size_t hop = static_cast<std::size_t>(kWindowHopSeconds * clip.sample_rate);
  const std::size_t n = clip.samples.size();

  std::vector<Window> out;
  auto emit = [&](std::size_t start) {
    Window w;
    w.source_id = clip.source_id;
    w.offset_s = static_cast<double>(start) / static_cast<double>(sr);
    w.label = label;
    w.samples.assign(win, 0.0);
    const std::size_t avail = n > start ? std::min(win, n - start) : 0;
    std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(start), avail,
                w.samples.begin());
    out.push_back(std::move(w));
  };

  if (n <= win) {
    emit(0);  // short clips zero-padded into one window
    return out;
  }
  std::size_t start = 0;
  for (; start + win <= n; start += hop) emit(start);
  // Tail coverage: one extra window ending exactly at the last sample.
  const std::size_t last_covered = out.empty() ? 0 : (start - hop) + win;
  if (last_covered < n) emit(n - win);
  return out;
}

std::array<double, 2> one_hot(Label l) {
  return l == Label::patient ? std::array<double, 2>{1.0, 0.0}
                             : std::array<double, 2>{0.0, 1.0};
}

std::uint64_t eval_rng_seed(const PipelineConfig& cfg, const std::string& speaker_id) {
  return Rng::derive(cfg.seed, "eval:" + speaker_id);
}

namespace {

struct WindowArtifacts {
  ComplexSpectrogram spec;
  MelSpectrogram mel;
  PitchTrack pitch;
  FeatureMatrix features;
};

WindowArtifacts process_window(const Window& w, const SpeakerRecord& rec,
                               const PipelineConfig& cfg, Mode mode, Rng& rng) {
  const SpectroConfig sc = cfg.spectro();
  WindowArtifacts art;

  AudioClip wc;
  wc.samples = w.samples;
  wc.sample_rate = sc.sample_rate;
  wc.source_id = w.source_id;

  art.spec = stft(wc, sc);
  art.mel = log_mel(art.spec, sc);
  if (cfg.needs_pitch()) {
    art.pitch = estimate_f0(wc, sc, cfg.f0_min, cfg.f0_max);
  }
  if (mode == Mode::train && cfg.specaugment_enabled) {
    art.mel = spec_augment(art.mel, cfg.specaug, rng);
  }
  const MelSpectrogram* mel_ptr =
      cfg.layout != FeatureLayout::meta_only ? &art.mel : nullptr;
  const PitchTrack* pitch_ptr = cfg.needs_pitch() ? &art.pitch : nullptr;
  const SpeakerRecord* rec_ptr = cfg.needs_pitch() ? &rec : nullptr;
  art.features = assemble(mel_ptr, pitch_ptr, rec_ptr, cfg.layout);
  return art;
}

}  // namespace

std::vector<WindowFeatures> preprocess_step(const SpeakerRecord& rec,
                                            const NoiseBank& bank,
                                            const PipelineConfig& cfg, Mode mode,
                                            Rng& rng) {
  AudioClip clip = read_wav(rec.clip_path);
  clip.source_id = rec.id;
  clip = inject_noise(clip, bank, rec.label, rng);
  const std::vector<Window> windows = make_windows(clip, rec.label);

  std::vector<WindowFeatures> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    WindowArtifacts art = process_window(windows[i], rec, cfg, mode, rng);
    WindowFeatures wf;
    wf.features = std::move(art.features);
    wf.label_vec = one_hot(rec.label);
    wf.source_id = rec.id;
    wf.offset_s = windows[i].offset_s;
    wf.index = static_cast<int>(i);
    out.push_back(std::move(wf));
  }
  return out;
}

PreparedWindow prepare_window(const SpeakerRecord& rec, const NoiseBank& bank,
                              const PipelineConfig& cfg, Mode mode,
                              int window_index, Rng& rng) {
  AudioClip clip = read_wav(rec.clip_path);
  clip.source_id = rec.id;
  clip = inject_noise(clip, bank, rec.label, rng);
  std::vector<Window> windows = make_windows(clip, rec.label);
  if (window_index < 0 || window_index >= static_cast<int>(windows.size())) {
    throw std::invalid_argument("prepare_window: window index " +
                                std::to_string(window_index) + " out of range (record has " +
                                std::to_string(windows.size()) + " windows)");
  }
  PreparedWindow pw;
  pw.window = std::move(windows[static_cast<std::size_t>(window_index)]);
  WindowArtifacts art = process_window(pw.window, rec, cfg, mode, rng);
  pw.spec = std::move(art.spec);
  pw.mel = std::move(art.mel);
  pw.pitch = std::move(art.pitch);
  pw.features = std::move(art.features);
  return pw;
}

}  // namespace spira
