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

// Brute-force reference implementations used to cross-check the engine.

#include "flowetl/cell.hpp"
#include "flowetl/ir.hpp"
#include "flowetl/schema.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace flowetl::oracle {

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct Bounds {
  double lo, hi;
};

/// median +- a * b * median(|x - median|), evaluated straight from the formula.
inline Bounds mad_formula(const std::vector<double>& x, double a = 1.48, double b = 3.0) {
  const double m = sorted_median(x);
  std::vector<double> dev;
  for (double v : x) dev.push_back(std::fabs(v - m));
  const double mad = b * sorted_median(dev);
  return {m - a * mad, m + a * mad};
}

inline std::size_t missing_cells(const IR& ir) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < ir.row_count(); ++r)
    for (std::size_t c = 0; c < ir.column_count(); ++c)
      if (ir.rows()[r][c].is_missing()) ++n;
  return n;
}

/// Same cells under the same header names, whatever the column order.
inline bool rows_equal(const IR& a, const Row& ra, const IR& b, const Row& rb) {
  if (a.column_count() != b.column_count()) return false;
  for (std::size_t i = 0; i < a.column_count(); ++i) {
    const auto j = b.column_index(a.headers()[i]);
    if (!j || !(ra[i] == rb[*j])) return false;
  }
  return true;
}

/// Rows with an equal earlier row, by pairwise comparison.
inline std::size_t duplicate_rows(const IR& ir) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ir.row_count(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (rows_equal(ir, ir.rows()[i], ir, ir.rows()[j])) {
        ++n;
        break;
      }
  return n;
}

/// First occurrences, in order, by pairwise comparison.
inline std::vector<Row> dedup(const IR& ir) {
  std::vector<Row> out;
  for (const auto& row : ir.rows()) {
    bool seen = false;
    for (const auto& kept : out) seen = seen || rows_equal(ir, row, ir, kept);
    if (!seen) out.push_back(row);
  }
  return out;
}

inline std::size_t outlier_cells(const IR& ir, const ColumnSchema& schema) {
  std::size_t n = 0;
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    if (schema.find(ir.headers()[c]) != ColumnType::Number) continue;
    std::vector<double> x;
    for (const auto& row : ir.rows())
      if (auto v = row[c].numeric()) x.push_back(*v);
    if (x.size() < 3) continue;
    const Bounds b = mad_formula(x);
    for (double v : x) n += (v < b.lo || v > b.hi) ? 1 : 0;
  }
  return n;
}

}  // namespace flowetl::oracle
