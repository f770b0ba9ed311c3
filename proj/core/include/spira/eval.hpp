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

#ifndef SPIRA_EVAL_HPP_
#define SPIRA_EVAL_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spira/explain.hpp"
#include "spira/model.hpp"
#include "spira/pipeline.hpp"

namespace spira {

/// Patient is the positive class throughout.
struct ConfusionMatrix {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  long total() const { return tp + tn + fp + fn; }
  double accuracy() const {
    return total() > 0 ? static_cast<double>(tp + tn) / total() : 0.0;
  }
};

struct VoteResult {
  Label predicted = Label::patient;
  double sum_patient = 0.0;
  double sum_control = 0.0;
};

/// Sums the per-window class probabilities; argmax wins, exact ties go to
/// patient (screening prefers false positives over misses).
VoteResult vote(const std::vector<std::pair<double, double>>& window_probs);

struct SpeakerResult {
  std::string id;
  Label truth = Label::control;
  Label predicted = Label::control;
  double sum_patient = 0.0;
  double sum_control = 0.0;
  int windows = 0;
};

struct EvalResult {
  ConfusionMatrix cm;
  std::vector<SpeakerResult> speakers;
};

using WindowPredictor =
    std::function<std::pair<double, double>(const FeatureMatrix&)>;

/// One vote per speaker over its eval-mode windows (noise injection applies
/// to all audios, seeded per speaker so repeat runs are stable).
EvalResult evaluate(const ModelState& state, const CorpusManifest& manifest,
                    Split split, const NoiseBank& bank, const PipelineConfig& cfg,
                    int workers = 1);

/// Same protocol with an arbitrary per-window predictor (test seam).
EvalResult evaluate_with(const WindowPredictor& predictor,
                         const CorpusManifest& manifest, Split split,
                         const NoiseBank& bank, const PipelineConfig& cfg,
                         int workers = 1);

void write_per_speaker_csv(const EvalResult& result, const std::string& path);
/// Table row format: exp,tp,tn,fp,fn,acc_percent (accuracy to two decimals).
void write_results_csv(int exp_id, const ConfusionMatrix& cm, const std::string& path);

// ---- bias probe ----

struct ProbeArm {
  bool injection = false;
  double acc_normal = 0.0;
  double acc_swapped = 0.0;
  double drop() const { return acc_normal - acc_swapped; }
};

struct ProbeReport {
  ProbeArm with_injection;
  ProbeArm without_injection;
};

struct ProbeOptions {
  std::string corpus_dir;  // must contain manifest.csv, noise/, profile.txt
  std::string work_dir;    // swapped clips are regenerated here
  std::uint64_t seed = 0;
  TrainHyper hyper;
  PipelineConfig pipe;                 // layout/set for both arms
  std::optional<ModelConfig> model;    // default_for(input shape) when unset
  int workers = 1;
};

/// Trains one model with noise injection and one without, then evaluates
/// both on the test split and on a noise-swapped regeneration of it.
ProbeReport bias_probe(const ProbeOptions& opt);

void write_probe_csv(const ProbeReport& report, const std::string& path);

// ---- experiment runner ----

struct ExperimentSpec {
  FeatureLayout layout = FeatureLayout::spec_only;
  int set = 1;
  bool specaugment = false;
  bool mixup = false;
};

/// Experiments 1/2/3/5 as input/training variations; 4 and 6 are reported
/// as unavailable (transfer learning is out of scope; resynthesis lives in
/// the explain path).
ExperimentSpec experiment_spec(int exp_id);

struct ExperimentResult {
  int exp_id = 0;
  ConfusionMatrix cm;
  TrainReport report;
  EvalResult eval;
  std::string checkpoint_path;
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::optional<TrainHyper> hyper;
  std::optional<ModelConfig> model;
  int workers = 1;
  int panel_windows = 4;  // Grad-CAM panels emitted for this many test windows
};

ExperimentResult run_experiment(int exp_id, const std::string& corpus_dir,
                                const std::string& out_dir, const RunOptions& opt);

/// Preprocesses every speaker of a split in train mode; used as the
/// trainer's per-epoch data source.
std::vector<WindowFeatures> preprocess_split(const CorpusManifest& manifest,
                                             Split split, const NoiseBank& bank,
                                             const PipelineConfig& cfg, Mode mode,
                                             std::uint64_t seed, int epoch,
                                             int workers);

}  // namespace spira

#endif  // SPIRA_EVAL_HPP_
