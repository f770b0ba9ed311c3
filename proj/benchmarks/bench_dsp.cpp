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

#include <cmath>

#include "spira/dsp.hpp"
#include "spira/rng.hpp"

using namespace spira;

namespace {

AudioClip four_second_window() {
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(64000);
  Rng rng(1);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = 0.5 * std::sin(2 * M_PI * 150.0 * static_cast<double>(i) / 16000.0) +
                      0.05 * rng.uniform(-1.0, 1.0);
  }
  return clip;
}

void BM_StftSet1(benchmark::State& state) {
  const AudioClip clip = four_second_window();
  const SpectroConfig cfg = SpectroConfig::set1();
  for (auto _ : state) {
    ComplexSpectrogram spec = stft(clip, cfg);
    benchmark::DoNotOptimize(spec.magnitude.v.data());
  }
}
BENCHMARK(BM_StftSet1);

void BM_LogMelSet1(benchmark::State& state) {
  const AudioClip clip = four_second_window();
  const SpectroConfig cfg = SpectroConfig::set1();
  const ComplexSpectrogram spec = stft(clip, cfg);
  for (auto _ : state) {
    MelSpectrogram mel = log_mel(spec, cfg);
    benchmark::DoNotOptimize(mel.values.v.data());
  }
}
BENCHMARK(BM_LogMelSet1);

void BM_InverseLogMel(benchmark::State& state) {
  const AudioClip clip = four_second_window();
  const SpectroConfig cfg = SpectroConfig::set1();
  const ComplexSpectrogram spec = stft(clip, cfg);
  const MelSpectrogram mel = log_mel(spec, cfg);
  for (auto _ : state) {
    AudioClip out = inverse_log_mel(mel, spec.phase, cfg, 64000);
    benchmark::DoNotOptimize(out.samples.data());
  }
}
BENCHMARK(BM_InverseLogMel);

void BM_EstimateF0(benchmark::State& state) {
  const AudioClip clip = four_second_window();
  const SpectroConfig cfg = SpectroConfig::set1();
  for (auto _ : state) {
    PitchTrack track = estimate_f0(clip, cfg, 70.0, 400.0);
    benchmark::DoNotOptimize(track.f0.data());
  }
}
BENCHMARK(BM_EstimateF0);

}  // namespace

BENCHMARK_MAIN();
