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

#include "flowetl/cell.hpp"
#include "flowetl/ir.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowetl {

/// Column name → FlowETL type, kept in header order.
class ColumnSchema {
 public:
  using Entry = std::pair<std::string, ColumnType>;

  ColumnSchema() = default;
  explicit ColumnSchema(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view name) const { return find(name).has_value(); }
  std::optional<ColumnType> find(std::string_view name) const;
  /// Throws ContractViolation for an unknown column.
  ColumnType at(std::string_view name) const;

  void set(const std::string& name, ColumnType type);
  /// Keeps only the named columns, in the order given.
  ColumnSchema restricted_to(const std::vector<std::string>& names) const;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Per column: skip Missing and empty cells, tally cell types and distinct
/// serialized values. Exactly two distinct values over more than two cells
/// → boolean; otherwise more than one recorded type → ambiguous; otherwise
/// the single type. Columns with no values are string.
ColumnSchema infer_schema(const IR& ir);

/// Schema for `ir`, taking types from `known` where present and inferring the rest.
ColumnSchema schema_for(const IR& ir, const ColumnSchema& known);

nlohmann::ordered_json schema_to_json(const ColumnSchema& schema);
ColumnSchema schema_from_json(const nlohmann::ordered_json& json);

}  // namespace flowetl
