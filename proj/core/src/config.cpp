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

#include "spira/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

extern "C" char** environ;

namespace spira {

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  KeyValueConfig kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Trim leading whitespace; skip blanks and comments.
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == first) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                               " is not key=value: '" + line + "'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

void KeyValueConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override is not key=value: '" + o + "'");
    }
    set(o.substr(0, eq), o.substr(eq + 1));
  }
}

void KeyValueConfig::apply_env(const std::string& prefix) {
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::replace(key.begin(), key.end(), '_', '.');
    set(key, entry.substr(eq + 1));
  }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw std::invalid_argument("config: empty key");
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.find(key) != entries_.end();
}

std::string KeyValueConfig::get(const std::string& key, const std::string& dflt) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? dflt : it->second;
}

double KeyValueConfig::get_num(const std::string& key, double dflt) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' is not a number: '" + it->second +
                             "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool dflt) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: '" + key + "' is not a boolean: '" + v + "'");
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
  const std::set<std::string> allowed(known.begin(), known.end());
  std::string bad;
  for (const auto& [k, v] : entries_) {
    (void)v;
    if (allowed.find(k) == allowed.end()) {
      if (!bad.empty()) bad += ", ";
      bad += k;
    }
  }
  if (!bad.empty()) throw std::invalid_argument("unknown config key(s): " + bad);
}

void KeyValueConfig::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config echo: " + path);
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

std::vector<std::string> pipeline_config_keys() {
  return {"set",
          "layout",
          "mode",
          "seed",
          "noise_counts.patient",
          "noise_counts.control",
          "specaugment.enabled",
          "mixup.enabled",
          "mixup.alpha",
          "specaug.F",
          "specaug.T",
          "specaug.n_freq_masks",
          "specaug.n_time_masks",
          "f0.min",
          "f0.max"};
}

PipelineConfig pipeline_config_from(const KeyValueConfig& kv) {
  kv.require_known(pipeline_config_keys());
  PipelineConfig cfg;
  cfg.set = static_cast<int>(kv.get_num("set", cfg.set));
  cfg.layout = layout_from_string(kv.get("layout", to_string(cfg.layout)));
  cfg.seed = static_cast<std::uint64_t>(kv.get_num("seed", 0));
  cfg.noise_patient = static_cast<int>(kv.get_num("noise_counts.patient", cfg.noise_patient));
  cfg.noise_control = static_cast<int>(kv.get_num("noise_counts.control", cfg.noise_control));
  cfg.specaugment_enabled = kv.get_bool("specaugment.enabled", cfg.specaugment_enabled);
  cfg.mixup_enabled = kv.get_bool("mixup.enabled", cfg.mixup_enabled);
  cfg.mixup.alpha = kv.get_num("mixup.alpha", cfg.mixup.alpha);
  cfg.specaug.F = static_cast<int>(kv.get_num("specaug.F", cfg.specaug.F));
  cfg.specaug.T = static_cast<int>(kv.get_num("specaug.T", cfg.specaug.T));
  cfg.specaug.n_freq_masks =
      static_cast<int>(kv.get_num("specaug.n_freq_masks", cfg.specaug.n_freq_masks));
  cfg.specaug.n_time_masks =
      static_cast<int>(kv.get_num("specaug.n_time_masks", cfg.specaug.n_time_masks));
  cfg.f0_min = kv.get_num("f0.min", cfg.f0_min);
  cfg.f0_max = kv.get_num("f0.max", cfg.f0_max);
  SpectroConfig::preset(cfg.set);  // validates the set id
  return cfg;
}

}  // namespace spira
