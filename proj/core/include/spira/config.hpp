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

#ifndef SPIRA_CONFIG_HPP_
#define SPIRA_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

#include "spira/pipeline.hpp"

namespace spira {

/// Flat key=value configuration. Sources merge in order: file, SPIRA_*
/// environment variables, explicit overrides. Unknown keys are rejected when
/// the config is converted to a typed struct.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  /// key=value strings, e.g. from repeated --set flags.
  void apply_overrides(const std::vector<std::string>& overrides);
  /// Environment variables with the given prefix; SPIRA_MIXUP_ALPHA maps to
  /// mixup.alpha (underscores after the prefix become dots, lowercased).
  void apply_env(const std::string& prefix = "SPIRA_");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key, double dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Throws listing any key outside the allowed set.
  void require_known(const std::vector<std::string>& known) const;

  /// Echo for provenance: sorted key=value lines.
  void write(const std::string& path) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Builds a pipeline config from the recognized keys (set, mode is handled
/// by the caller, noise_counts.*, specaugment.enabled, mixup.enabled, seed,
/// layout, mixup.alpha, specaug.F/T/n_freq_masks/n_time_masks, f0.min/max)
/// and rejects anything else.
PipelineConfig pipeline_config_from(const KeyValueConfig& kv);

std::vector<std::string> pipeline_config_keys();

}  // namespace spira

#endif  // SPIRA_CONFIG_HPP_
