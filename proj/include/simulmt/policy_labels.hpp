// Copyright 2026 The simulmt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Policy label generation: turns the attention matrix of a full-sentence
// translation into a binary read/write supervision matrix.
//
// For target row i the write point is the first source column j with
//   cumulative attention f[i][j] >= gamma  and  argmax_j' a[i][j'] <= j,
// pushed right so it is never left of row i-1's write point. Everything
// from the write point rightward is labelled WRITE.

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "simulmt/core.hpp"

namespace simulmt {

struct LabelGenConfig {
  double gamma = 0.5;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw ValidationError("gamma must be in (0, 1], got " + std::to_string(gamma));
  }
};

struct TrainingCell {
  std::size_t target_index = 0;  // 0-based row
  std::size_t source_index = 0;  // 0-based column
  Action label = Action::kRead;

  friend bool operator==(const TrainingCell&, const TrainingCell&) = default;
};

// Cumulative sums are compared against gamma with this slack so that a
// mathematically exact tie (e.g. 0.1 + 0.2 vs 0.3) still counts as reached.
inline constexpr double kGammaTieSlack = 1e-9;

inline void require_valid(const AttentionMatrix& a) {
  if (auto v = validate_attention(a)) throw ValidationError("invalid attention matrix: " + v->message);
}

inline CumulativeMatrix cumulative_attention(const AttentionMatrix& a) {
  require_valid(a);
  CumulativeMatrix f(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      acc += a(i, j);
      f(i, j) = acc;
    }
  }
  return f;
}

// Leftmost maximal column of a row.
inline std::size_t row_argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

// 0-based write point per row; the label matrix is fully determined by it.
inline std::vector<std::size_t> label_write_points(const AttentionMatrix& a, const LabelGenConfig& cfg) {
  cfg.validate();
  const CumulativeMatrix f = cumulative_attention(a);
  const std::size_t last = a.cols() - 1;
  std::vector<std::size_t> points(a.rows());
  std::size_t prev = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::size_t raw = last;
    for (std::size_t j = row_argmax(a.row(i)); j < a.cols(); ++j) {
      if (f(i, j) >= cfg.gamma - kGammaTieSlack) {
        raw = j;
        break;
      }
    }
    prev = std::max(prev, raw);
    points[i] = prev;
  }
  return points;
}

inline PolicyLabelMatrix labels_from_write_points(const std::vector<std::size_t>& points, std::size_t cols) {
  if (points.empty() || cols == 0) throw DimensionError("label matrix must be non-empty");
  PolicyLabelMatrix l(points.size(), cols, 0);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = std::min(points[i], cols - 1); j < cols; ++j) l(i, j) = 1;
  return l;
}

inline PolicyLabelMatrix generate_label_matrix(const AttentionMatrix& a, const LabelGenConfig& cfg) {
  return labels_from_write_points(label_write_points(a, cfg), a.cols());
}

// Cells reachable at inference: row i is only ever queried at or right of
// row i-1's write point.
inline std::vector<TrainingCell> extract_training_cells(const PolicyLabelMatrix& l) {
  if (auto v = validate_staircase(l)) throw ValidationError("invalid label matrix: " + v->message);
  std::vector<TrainingCell> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    for (std::size_t j = start; j < l.cols(); ++j)
      cells.push_back({i, j, l(i, j) ? Action::kWrite : Action::kRead});
    start = write_point(l, i);
  }
  return cells;
}

}  // namespace simulmt
