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

#include <benchmark/benchmark.h>

#include "spira/explain.hpp"
#include "spira/model.hpp"
#include "spira/rng.hpp"

using namespace spira;

namespace {

FeatureMatrix random_input(int rows, int cols) {
  Rng rng(2);
  FeatureMatrix fm;
  fm.layout = FeatureLayout::spec_only;
  fm.values = Mat(rows, cols);
  for (double& v : fm.values.v) v = rng.uniform(0.0, 1.0);
  return fm;
}

nn::Tensor random_batch(int n, int rows, int cols) {
  Rng rng(3);
  nn::Tensor t({n, 1, rows, cols});
  for (double& v : t.v) v = rng.uniform(0.0, 1.0);
  return t;
}

void BM_ForwardEval(benchmark::State& state) {
  const ModelState model = init_model(ModelConfig::default_for(80, 401), 1);
  const FeatureMatrix x = random_input(80, 401);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_window(model, x));
  }
}
BENCHMARK(BM_ForwardEval);

void BM_TrainStepBatch16(benchmark::State& state) {
  ModelState model = init_model(ModelConfig::default_for(80, 401), 1);
  const nn::Tensor x = random_batch(16, 80, 401);
  std::vector<double> dlogits(16, 1.0 / 16.0);
  for (auto _ : state) {
    const BatchForward fwd = batch_forward(model, x, Mode::train);
    Gradients g = batch_backward(model, fwd, dlogits);
    benchmark::DoNotOptimize(g.params.begin()->second.v.data());
  }
}
BENCHMARK(BM_TrainStepBatch16);

void BM_GradCam(benchmark::State& state) {
  const ModelConfig cfg = ModelConfig::default_for(80, 401);
  const ModelState model = init_model(cfg, 1);
  const FeatureMatrix x = random_input(80, 401);
  for (auto _ : state) {
    HeatMap heat = grad_cam(model, x, default_target_layer(cfg), Label::patient);
    benchmark::DoNotOptimize(heat.values.v.data());
  }
}
BENCHMARK(BM_GradCam);

}  // namespace

BENCHMARK_MAIN();
