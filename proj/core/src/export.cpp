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

#include "spira/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace spira {

namespace {
std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}
}  // namespace

void write_matrix_csv(const Mat& m, const std::string& path) {
  std::ofstream out = open_out(path, std::ios::out);
  char buf[40];
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", m(r, c));
      out << buf;
      if (c + 1 < m.cols) out << ',';
    }
    out << '\n';
  }
}

namespace {
void write_pgm_bytes(const Mat& m, const std::string& path, double lo,
                     double hi) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << m.cols << " " << m.rows << "\n255\n";
  const double span = hi - lo;
  std::vector<unsigned char> row(static_cast<std::size_t>(m.cols));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      double t = span > 0 ? (m(r, c) - lo) / span : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      row[static_cast<std::size_t>(c)] =
          static_cast<unsigned char>(std::lround(t * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}
}  // namespace

void write_pgm(const Mat& m, const std::string& path) {
  write_pgm_bytes(m, path, m.min_value(), m.max_value());
}

void write_pgm_unit(const Mat& m, const std::string& path) {
  write_pgm_bytes(m, path, 0.0, 1.0);
}

}  // namespace spira
