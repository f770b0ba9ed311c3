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

#ifndef SPIRA_SRC_DSP_INTERNAL_HPP_
#define SPIRA_SRC_DSP_INTERNAL_HPP_

#include <cstdint>
#include <vector>

namespace spira::internal {

/// Reflect padding (no edge repeat) by `pad` samples on each side.
std::vector<double> reflect_pad(const std::vector<double>& x, int pad);

}  // namespace spira::internal

#endif  // SPIRA_SRC_DSP_INTERNAL_HPP_
