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


// Test-only reference implementations and fixtures shared by the unit and
// acceptance suites. Nothing here calls the code under test.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace simulmt::testing {

// Attention rows on a grid of 1/kGridUnits, stored as integer units so that
// cumulative sums and threshold comparisons are exact.
inline constexpr int kGridUnits = 20;

using UnitRow = std::vector<int>;
using UnitMatrix = std::vector<UnitRow>;

// Cell-by-cell label oracle: raw rule, then row closure, then cross-row
// enforcement, then the last-column guarantee, each as a separate pass over
// every cell. gamma_units is gamma in grid units (gamma * kGridUnits).
inline std::vector<std::vector<std::uint8_t>> oracle_labels(const UnitMatrix& a, int gamma_units) {
  const std::size_t rows = a.size(), cols = a[0].size();
  std::vector<std::vector<std::uint8_t>> raw(rows, std::vector<std::uint8_t>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < cols; ++j)
      if (a[i][j] > a[i][argmax]) argmax = j;
    for (std::size_t j = 0; j < cols; ++j) {
      int f = 0;
      for (std::size_t k = 0; k <= j; ++k) f += a[i][k];
      raw[i][j] = (f >= gamma_units && argmax <= j) ? 1 : 0;
    }
  }
  auto closed = raw;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      bool any_left = false;
      for (std::size_t k = 0; k <= j; ++k) any_left = any_left || raw[i][k];
      closed[i][j] = any_left ? 1 : 0;
    }
  auto out = closed;
  for (std::size_t i = 1; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (out[i - 1][j] == 0) out[i][j] = 0;
  for (std::size_t i = 0; i < rows; ++i) out[i][cols - 1] = 1;
  return out;
}

inline std::vector<std::vector<double>> to_probabilities(const UnitMatrix& a) {
  std::vector<std::vector<double>> out;
  for (const auto& row : a) {
    std::vector<double> r;
    for (int u : row) r.push_back(static_cast<double>(u) / kGridUnits);
    out.push_back(std::move(r));
  }
  return out;
}

// Every composition of kGridUnits into `cols` non-negative parts.
inline std::vector<UnitRow> all_grid_rows(std::size_t cols) {
  std::vector<UnitRow> out;
  UnitRow row(cols, 0);
  auto rec = [&](auto&& self, std::size_t j, int left) -> void {
    if (j + 1 == cols) {
      row[j] = left;
      out.push_back(row);
      return;
    }
    for (int u = 0; u <= left; ++u) {
      row[j] = u;
      self(self, j + 1, left - u);
    }
  };
  rec(rec, 0, kGridUnits);
  return out;
}

// Uniform draw from the grid rows via stars and bars.
inline UnitRow random_grid_row(std::size_t cols, std::mt19937_64& rng) {
  std::vector<int> positions(kGridUnits + cols - 1);
  for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = static_cast<int>(k);
  std::shuffle(positions.begin(), positions.end(), rng);
  std::vector<int> bars(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(cols - 1));
  std::sort(bars.begin(), bars.end());
  UnitRow row(cols);
  int prev = -1;
  for (std::size_t j = 0; j + 1 < cols; ++j) {
    row[j] = bars[j] - prev - 1;
    prev = bars[j];
  }
  row[cols - 1] = kGridUnits + static_cast<int>(cols) - 2 - prev;
  return row;
}

// Random row-stochastic matrix with continuous entries.
inline std::vector<std::vector<double>> random_attention(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  for (auto& r : out) {
    double sum = 0.0;
    for (double& v : r) sum += (v = e(rng));
    for (double& v : r) v /= sum;
  }
  return out;
}

// Average lag by direct summation, for cross-checking.
inline double reference_al(const std::vector<double>& d, double total, std::size_t target_len, std::size_t tau) {
  double s = 0.0;
  for (std::size_t i = 1; i <= tau; ++i) s += d[i - 1] - static_cast<double>(i - 1) * total / static_cast<double>(target_len);
  return s / static_cast<double>(tau);
}

}  // namespace simulmt::testing
