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

#ifndef SPIRA_PIPELINE_HPP_
#define SPIRA_PIPELINE_HPP_

#include <array>
#include <string>
#include <vector>

#include "spira/augment.hpp"
#include "spira/corpus.hpp"
#include "spira/dsp.hpp"
#include "spira/features.hpp"

namespace spira {

inline constexpr double kWindowSeconds = 4.0;
inline constexpr double kWindowHopSeconds = 1.0;

struct NoiseBank {
  std::vector<AudioClip> clips;
  std::vector<Label> channel;     // per clip: which environment it imitates
  int count_patient = 3;          // insertions per patient clip
  int count_control = 4;          // insertions per control clip

  int count_for(Label l) const {
    return l == Label::patient ? count_patient : count_control;
  }
  void validate() const;
};

/// Loads hospital_*.wav / domestic_*.wav from a directory.
NoiseBank load_noise_bank(const std::string& dir, int count_patient = 3,
                          int count_control = 4);

/// Mixes count_for(label) noise clips (drawn from the whole bank with
/// replacement, random crop/loop, gain ~ U[0.05, 0.20]) onto the clip.
/// Renormalizes the peak to <= 1 if the sum would clip. Zero counts return
/// the input unchanged.
AudioClip inject_noise(const AudioClip& clip, const NoiseBank& bank, Label label,
                       Rng& rng);

struct Window {
  std::vector<double> samples;  // exactly 4 s worth
  std::string source_id;
  double offset_s = 0.0;
  Label label = Label::control;
};

/// Four-second windows on a one-second hop; a non-integral tail gets one
/// extra window at offset d-4 so the final samples are covered. Clips
/// shorter than 4 s are zero-padded into a single window.
std::vector<Window> make_windows(const AudioClip& clip, Label label);

enum class Mode { train, eval };

struct PipelineConfig {
  int set = 1;  // spectrogram preset (1 or 2)
  FeatureLayout layout = FeatureLayout::spec_only;
  int noise_patient = 3;
  int noise_control = 4;
  bool specaugment_enabled = false;
  bool mixup_enabled = false;
  MixupConfig mixup;
  SpecAugmentConfig specaug;
  std::uint64_t seed = 0;
  double f0_min = 70.0;
  double f0_max = 400.0;

  SpectroConfig spectro() const { return SpectroConfig::preset(set); }
  bool needs_pitch() const { return layout != FeatureLayout::spec_only; }
};

struct WindowFeatures {
  FeatureMatrix features;
  std::array<double, 2> label_vec{};  // (patient, control) one-hot
  std::string source_id;
  double offset_s = 0.0;
  int index = 0;
};

/// One window fully prepared, with the intermediates the explain path needs.
struct PreparedWindow {
  Window window;
  ComplexSpectrogram spec;
  MelSpectrogram mel;
  PitchTrack pitch;
  FeatureMatrix features;
};

/// The per-record dynamic preprocessing chain, in order: noise injection,
/// windowing, spectrogram (+F0 when the layout needs it), SpecAugment
/// (train mode only, when enabled), feature assembly. Mix-up happens at
/// batch level in the trainer. Fresh rng draws each call.
std::vector<WindowFeatures> preprocess_step(const SpeakerRecord& rec,
                                            const NoiseBank& bank,
                                            const PipelineConfig& cfg, Mode mode,
                                            Rng& rng);

/// Same chain for a single window index, keeping spectrogram/phase/pitch.
PreparedWindow prepare_window(const SpeakerRecord& rec, const NoiseBank& bank,
                              const PipelineConfig& cfg, Mode mode,
                              int window_index, Rng& rng);

/// Evaluation uses a per-speaker seed so repeated runs are stable.
std::uint64_t eval_rng_seed(const PipelineConfig& cfg, const std::string& speaker_id);

std::array<double, 2> one_hot(Label l);

}  // namespace spira

#endif  // SPIRA_PIPELINE_HPP_
