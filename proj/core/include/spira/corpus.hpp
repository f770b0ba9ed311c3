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

#ifndef SPIRA_CORPUS_HPP_
#define SPIRA_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spira/audio.hpp"
#include "spira/rng.hpp"

namespace spira {

enum class Label { patient, control };
enum class Split { train, val, test };

std::string to_string(Label l);
std::string to_string(Split s);
Label label_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct SpeakerRecord {
  std::string id;
  Label label = Label::control;
  int age = 0;       // years, [18, 100]
  int sex = 0;       // 0 = male, 1 = female
  std::string clip_path;
};

struct CorpusManifest {
  std::vector<SpeakerRecord> records;
  std::map<std::string, Split> split;

  const SpeakerRecord* find(const std::string& id) const;
  std::vector<const SpeakerRecord*> in_split(Split s) const;
  /// Checks id uniqueness, field ranges and that split covers exactly the
  /// id set. Throws std::runtime_error on violation.
  void validate() const;
};

/// Per-class speech statistics for the generator.
struct ClassProfile {
  double pause_mean = 0.2;    // seconds
  double pause_sd = 0.05;
  double segment_mean = 1.5;  // voiced segment length, seconds
  double segment_sd = 0.3;
  double energy_decay = 0.02;  // amplitude decay rate, 1/s
};

struct GenProfile {
  double duration_min = 6.0;
  double duration_max = 9.0;
  ClassProfile patient{0.40, 0.08, 0.60, 0.12, 0.08};
  ClassProfile control{0.15, 0.03, 2.00, 0.30, 0.015};
  double f0_male_min = 90.0, f0_male_max = 160.0;
  double f0_female_min = 160.0, f0_female_max = 260.0;
  int age_min = 20, age_max = 85;
  double noise_snr_db = 20.0;
  bool noise_enabled = true;
  /// Swap the per-class noise channels (patients get the domestic texture
  /// and vice versa); used to build counterfactual test sets.
  bool swap_noise_channels = false;
  int sample_rate = kPipelineRate;
  int noise_bank_per_channel = 4;
  double noise_bank_seconds = 10.0;

  void validate() const;
  const ClassProfile& for_label(Label l) const {
    return l == Label::patient ? patient : control;
  }
};

struct PauseSpan {
  std::string id;
  double begin_s = 0.0;
  double end_s = 0.0;
};

struct SpeakerClip {
  AudioClip clip;
  std::vector<PauseSpan> pauses;
};

struct GeneratedCorpus {
  CorpusManifest manifest;
  std::vector<PauseSpan> pauses;
};

/// Renders one speaker deterministically from (corpus seed, record id). The
/// speech substream is independent of the noise substream, so regenerating
/// with swapped noise channels keeps the speech bytes identical.
SpeakerClip render_speaker(const SpeakerRecord& rec, std::uint64_t corpus_seed,
                           const GenProfile& profile);

/// Synthesizes a noise texture for the given channel: patients get
/// narrowband beeps over a mains-style hum, controls get gated pink noise.
AudioClip synth_noise_texture(Label channel, double seconds, int sample_rate,
                              Rng& rng);

/// Generates the corpus under out_dir: clips/<id>.wav, noise/<channel>_k.wav,
/// manifest.csv, pauses.csv and profile.txt. All records start in the train
/// split; re-split with split_manifest(). Deterministic given the seed.
GeneratedCorpus generate_corpus(int n_patients, int n_controls,
                                std::uint64_t seed, const GenProfile& profile,
                                const std::string& out_dir,
                                int workers = 1);

/// Parses and validates a manifest CSV (header id,label,age,sex,path,split).
/// Relative clip paths are resolved against the manifest's directory and all
/// referenced WAVs must exist.
CorpusManifest load_manifest(const std::string& path);

/// Writes the manifest CSV; clip paths inside base_dir are stored relative.
void save_manifest(const CorpusManifest& m, const std::string& path);

/// Class-stratified split. Requested sizes must not exceed the record count;
/// records beyond the requested total are dropped from the result.
CorpusManifest split_manifest(const CorpusManifest& m, int n_train, int n_val,
                              int n_test, std::uint64_t seed);

std::vector<PauseSpan> load_pauses(const std::string& path);
void save_pauses(const std::vector<PauseSpan>& pauses, const std::string& path);

GenProfile load_profile(const std::string& path);
void save_profile(const GenProfile& p, const std::string& path);

}  // namespace spira

#endif  // SPIRA_CORPUS_HPP_
