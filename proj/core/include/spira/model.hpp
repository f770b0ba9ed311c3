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

#ifndef SPIRA_MODEL_HPP_
#define SPIRA_MODEL_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spira/augment.hpp"
#include "spira/features.hpp"
#include "spira/nn.hpp"
#include "spira/pipeline.hpp"

namespace spira {

struct ConvBlockSpec {
  int out_channels = 16;
  int kh = 3, kw = 3;
  int stride = 1;
  int pool_h = 2, pool_w = 2;
};

struct ModelConfig {
  std::vector<ConvBlockSpec> conv_blocks;
  int dense_units = 32;
  double dropout_rate = 0.0;
  int input_rows = 80;
  int input_cols = 401;

  /// 16/32/64/64-channel blocks with 3x3 kernels and 2x2 pooling.
  static ModelConfig default_for(int rows, int cols);
  /// Compact stand-in for quick tests and probes.
  static ModelConfig tiny_for(int rows, int cols);

  void validate() const;
  /// Map shape after the given number of blocks (conv stride + pool).
  std::pair<int, int> map_shape_after(int blocks) const;
};

/// Parameters plus batchnorm running buffers. `revision` advances on every
/// update so stale tapes can be rejected.
struct ModelState {
  ModelConfig config;
  std::map<std::string, nn::Tensor> params;
  std::map<std::string, nn::Tensor> buffers;
  std::uint64_t rng_seed = 0;
  bool training_flag = false;
  std::uint64_t revision = 0;
};

ModelState init_model(const ModelConfig& cfg, std::uint64_t seed);

struct Tape;  // opaque; holds the cached intermediates

/// Per-sample taped forward pass. feature_maps holds the post-ReLU
/// activation of every conv block ("block1".."blockN") as [C,H,W].
struct TapedForward {
  double logit = 0.0;
  double probability = 0.5;
  std::map<std::string, nn::Tensor> feature_maps;
  std::shared_ptr<Tape> tape;
  std::uint64_t revision = 0;
};

TapedForward forward(const ModelState& state, const FeatureMatrix& x, Mode mode,
                     Rng* dropout_rng = nullptr);

struct Gradients {
  std::map<std::string, nn::Tensor> params;
  std::map<std::string, nn::Tensor> feature_maps;  // d logit / d block output
};

/// Gradients of logit_weight * logit w.r.t. all parameters and the taped
/// feature maps. Throws if the state changed since the forward pass.
Gradients backward(const ModelState& state, const TapedForward& taped,
                   double logit_weight = 1.0);

std::pair<double, double> predict_window(const ModelState& state,
                                         const FeatureMatrix& x);

// ---- batched internals (used by the trainer and the gradient checks) ----

struct BatchForward {
  std::vector<double> logits;
  std::vector<double> probs;
  std::shared_ptr<Tape> tape;
  std::uint64_t revision = 0;
};

BatchForward batch_forward(const ModelState& state, const nn::Tensor& x, Mode mode,
                           Rng* dropout_rng = nullptr);
Gradients batch_backward(const ModelState& state, const BatchForward& fwd,
                         const std::vector<double>& dlogits,
                         bool want_feature_grads = false);
/// Folds the tape's batch statistics into the running buffers (momentum 0.1).
void update_running_stats(ModelState& state, const BatchForward& fwd);

// ---- training ----

struct TrainHyper {
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 16;
  int max_epochs = 50;
  int patience = 5;  // epochs without val improvement before stopping
  bool mixup_enabled = false;
  MixupConfig mixup;
  std::uint64_t seed = 0;
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainReport {
  std::vector<EpochStat> curve;
  int best_epoch = -1;
  double best_val_acc = 0.0;
};

/// Produces the epoch's training windows; called once per epoch so the
/// dynamic preprocessing draws fresh augmentation.
using EpochDataFn = std::function<std::vector<WindowFeatures>(int epoch)>;
/// Validation accuracy for the current state.
using ValidateFn = std::function<double(const ModelState&)>;

/// SGD with momentum on mean BCE; optional batch-level Mix-up; early stop on
/// validation accuracy, restoring the best parameters.
TrainReport train(ModelState& state, const EpochDataFn& data,
                  const ValidateFn& validate, const TrainHyper& hp);

void write_train_report_csv(const TrainReport& report, const std::string& path);

// ---- checkpoints ----

void save_state(const ModelState& state, const std::string& path);
ModelState load_state(const std::string& path);

}  // namespace spira

#endif  // SPIRA_MODEL_HPP_
