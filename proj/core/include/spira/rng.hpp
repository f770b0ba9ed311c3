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

#ifndef SPIRA_RNG_HPP_
#define SPIRA_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace spira {

/// Deterministic random source. Every sampler maps engine words to values
/// with a fixed consumption pattern, so two runs with the same seed produce
/// identical streams on any platform (the std::*_distribution adapters do
/// not guarantee that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1). Consumes exactly one engine word.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {0, ..., n-1}. Consumes exactly one engine word.
  std::int64_t uniform_int(std::int64_t n);

  /// Standard normal via Box-Muller; pairs are cached so consumption is two
  /// words per two variates.
  double normal(double mean = 0.0, double sd = 1.0);

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze (boosted for shape < 1).
  double gamma(double shape);

  /// Beta(a, b) from a pair of gamma variates.
  double beta(double a, double b);

  /// Engine words consumed so far.
  std::uint64_t calls() const { return calls_; }

  /// Stable stream derivation: mixes a seed with a tag (and optional index)
  /// so per-item substreams are independent of iteration order.
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag,
                              std::uint64_t index = 0);

 private:
  std::uint64_t next() {
    ++calls_;
    return eng_();
  }

  std::mt19937_64 eng_;
  std::uint64_t calls_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace spira

#endif  // SPIRA_RNG_HPP_
