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

#ifndef SPIRA_AUDIO_HPP_
#define SPIRA_AUDIO_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace spira {

/// The whole pipeline runs at 16 kHz; hop 160 / win 400 then give exactly
/// 401 frames over a four second window.
inline constexpr int kPipelineRate = 16000;

struct AudioClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate = kPipelineRate;
  std::string source_id;

  double duration() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

/// Reads a RIFF/WAVE file. Supports 16-bit PCM, mono or stereo; stereo is
/// downmixed by averaging. Integer samples are scaled by 1/32768.
AudioClip read_wav(const std::string& path);

struct WavWriteStats {
  std::size_t clipped = 0;  // samples outside [-1, 1] saturated on write
};

/// Writes mono 16-bit PCM at clip.sample_rate. Out-of-range samples are
/// saturated and counted in the returned stats.
WavWriteStats write_wav(const AudioClip& clip, const std::string& path);

/// Band-limited resampling with a 64-tap Kaiser-windowed sinc. Same-rate
/// calls return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace spira

#endif  // SPIRA_AUDIO_HPP_
