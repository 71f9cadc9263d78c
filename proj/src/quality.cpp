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

#include "flowetl/quality.hpp"

#include "flowetl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace flowetl {

double median(std::vector<double> values) {
  if (values.empty()) throw ContractViolation("median of an empty sample");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

MadBounds mad_bounds(std::span<const double> values, double a, double b) {
  if (values.empty()) throw ContractViolation("mad_bounds of an empty sample");
  MadBounds out;
  out.a = a;
  out.b = b;
  out.median = median(std::vector<double>(values.begin(), values.end()));
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double x : values) dev.push_back(std::fabs(x - out.median));
  out.mad = b * median(std::move(dev));
  out.t_min = out.median - a * out.mad;
  out.t_max = out.median + a * out.mad;
  return out;
}

std::string row_key(const IR& ir, const Row& row) {
  std::vector<std::pair<std::string_view, std::string>> pairs;
  pairs.reserve(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) pairs.emplace_back(ir.headers()[c], serialize_cell(row[c]));
  std::sort(pairs.begin(), pairs.end());
  std::string key;
  for (const auto& [h, v] : pairs) {
    key += std::to_string(h.size());
    key.push_back(':');
    key += h;
    key += std::to_string(v.size());
    key.push_back(':');
    key += v;
  }
  return key;
}

namespace {

std::size_t count_missing(const IR& ir) {
  std::size_t missing = 0;
  for (const auto& row : ir.rows())
    for (const auto& cell : row) missing += cell.is_missing() ? 1 : 0;
  return missing;
}

std::size_t count_duplicates(const IR& ir) {
  std::unordered_set<std::string> seen;
  seen.reserve(ir.row_count());
  for (const auto& row : ir.rows()) seen.insert(row_key(ir, row));
  return ir.row_count() - seen.size();
}

}  // namespace

double missing_ratio(const IR& ir) {
  if (ir.cell_count() == 0) return 0.0;
  return static_cast<double>(count_missing(ir)) / static_cast<double>(ir.cell_count());
}

double duplicate_ratio(const IR& ir) {
  if (ir.row_count() == 0) return 0.0;
  return static_cast<double>(count_duplicates(ir)) / static_cast<double>(ir.row_count());
}

std::optional<MadBounds> column_bounds(const IR& ir, std::size_t column) {
  std::vector<double> values;
  values.reserve(ir.row_count());
  for (const auto& row : ir.rows())
    if (auto v = row[column].numeric()) values.push_back(*v);
  if (values.size() < kMinOutlierSample) return std::nullopt;
  return mad_bounds(values);
}

std::vector<std::vector<bool>> outlier_mask(const IR& ir, const ColumnSchema& schema) {
  std::vector<std::vector<bool>> mask(ir.row_count(), std::vector<bool>(ir.column_count(), false));
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    if (schema.find(ir.headers()[c]) != ColumnType::Number) continue;
    const auto bounds = column_bounds(ir, c);
    if (!bounds) continue;
    for (std::size_t r = 0; r < ir.row_count(); ++r) {
      const auto v = ir.rows()[r][c].numeric();
      if (v && bounds->is_outlier(*v)) mask[r][c] = true;
    }
  }
  return mask;
}

namespace {

std::size_t count_outliers(const IR& ir, const ColumnSchema& schema) {
  std::size_t n = 0;
  for (const auto& row : outlier_mask(ir, schema))
    n += static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
  return n;
}

}  // namespace

double outlier_ratio(const IR& ir, const ColumnSchema& schema) {
  if (ir.cell_count() == 0) return 0.0;
  return static_cast<double>(count_outliers(ir, schema)) / static_cast<double>(ir.cell_count());
}

QualityIndicators dqs(const IR& ir, const ColumnSchema& schema) {
  QualityIndicators q;
  q.cell_count = ir.cell_count();
  q.row_count = ir.row_count();
  if (q.cell_count == 0) return q;
  q.missing_cells = count_missing(ir);
  q.outlier_cells = count_outliers(ir, schema);
  q.duplicate_rows = count_duplicates(ir);
  const auto n = static_cast<double>(q.cell_count);
  q.missing_ratio = static_cast<double>(q.missing_cells) / n;
  q.outlier_ratio = static_cast<double>(q.outlier_cells) / n;
  q.duplicate_ratio = static_cast<double>(q.duplicate_rows) / static_cast<double>(q.row_count);
  q.dqs = 1.0 - (q.missing_ratio + q.outlier_ratio + q.duplicate_ratio) / 3.0;
  return q;
}

}  // namespace flowetl
