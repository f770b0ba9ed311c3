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

#ifndef SPIRA_EXPORT_HPP_
#define SPIRA_EXPORT_HPP_

#include <string>

#include "spira/mat.hpp"

namespace spira {

/// Row-major CSV dump, 9 significant digits per value.
void write_matrix_csv(const Mat& m, const std::string& path);

/// 8-bit binary PGM (P5). Values are min-max scaled to [0, 255]; a constant
/// matrix maps to 0.
void write_pgm(const Mat& m, const std::string& path);

/// PGM for matrices already in [0, 1]: pixel = round(value * 255).
void write_pgm_unit(const Mat& m, const std::string& path);

}  // namespace spira

#endif  // SPIRA_EXPORT_HPP_
