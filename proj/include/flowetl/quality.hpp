// Copyright 2026 The FlowETL Authors
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

#pragma once

#include "flowetl/ir.hpp"
#include "flowetl/schema.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flowetl {

inline constexpr double kMadA = 1.48;
inline constexpr double kMadB = 3.0;
/// Columns with fewer non-missing numeric values never yield outliers.
inline constexpr std::size_t kMinOutlierSample = 3;

struct MadBounds {
  double median = 0.0;
  double mad = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double a = kMadA;
  double b = kMadB;

  bool is_outlier(double x) const noexcept { return x < t_min || x > t_max; }
};

/// Midpoint of the two middle values for even lengths. Throws
/// ContractViolation on empty input.
double median(std::vector<double> values);

/// MAD = b * median(|X - median(X)|); bounds are median ± a * MAD.
MadBounds mad_bounds(std::span<const double> values, double a = kMadA, double b = kMadB);

struct QualityIndicators {
  double missing_ratio = 0.0;
  double outlier_ratio = 0.0;
  double duplicate_ratio = 0.0;
  double dqs = 1.0;
  std::size_t cell_count = 0;
  std::size_t row_count = 0;
  std::size_t missing_cells = 0;
  std::size_t outlier_cells = 0;
  std::size_t duplicate_rows = 0;
};

/// Order-insensitive row identity: the sorted (header, serialized cell)
/// pairs, length-prefixed so distinct rows never share a key.
std::string row_key(const IR& ir, const Row& row);

/// Missing cells / all cells. 0 for an empty IR.
double missing_ratio(const IR& ir);
/// (rows - distinct rows) / rows. 0 for an empty IR.
double duplicate_ratio(const IR& ir);

/// Bounds of one column over its non-missing numeric values, or nothing
/// when there are fewer than kMinOutlierSample of them.
std::optional<MadBounds> column_bounds(const IR& ir, std::size_t column);

/// mask[row][col] is true for cells outside their number column's bounds.
std::vector<std::vector<bool>> outlier_mask(const IR& ir, const ColumnSchema& schema);
/// Outlier cells in number columns / all cells.
double outlier_ratio(const IR& ir, const ColumnSchema& schema);

/// M, O, D and DQS = 1 - (M + O + D) / 3.
QualityIndicators dqs(const IR& ir, const ColumnSchema& schema);

}  // namespace flowetl
