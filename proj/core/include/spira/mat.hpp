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

#ifndef SPIRA_MAT_HPP_
#define SPIRA_MAT_HPP_

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace spira {

/// Dense row-major double matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative shape");
  }

  double& operator()(int r, int c) {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const {
    return rows == o.rows && cols == o.cols;
  }

  double min_value() const {
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
  }
  double max_value() const {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  }
  double mean_value() const {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
};

}  // namespace spira

#endif  // SPIRA_MAT_HPP_
