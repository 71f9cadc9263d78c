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

#include "flowetl/schema.hpp"

#include "flowetl/errors.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace flowetl {

ColumnSchema::ColumnSchema(std::vector<Entry> entries) {
  for (auto& [name, type] : entries) set(name, type);
}

std::optional<ColumnType> ColumnSchema::find(std::string_view name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  return std::nullopt;
}

ColumnType ColumnSchema::at(std::string_view name) const {
  if (auto t = find(name)) return *t;
  throw ContractViolation("schema has no column '" + std::string(name) + "'");
}

void ColumnSchema::set(const std::string& name, ColumnType type) {
  for (auto& [n, t] : entries_) {
    if (n == name) {
      t = type;
      return;
    }
  }
  entries_.emplace_back(name, type);
}

ColumnSchema ColumnSchema::restricted_to(const std::vector<std::string>& names) const {
  ColumnSchema out;
  for (const auto& n : names)
    if (auto t = find(n)) out.set(n, *t);
  return out;
}

namespace {

ColumnType infer_column(const IR& ir, std::size_t col) {
  std::set<ColumnType> types;
  std::unordered_set<std::string> values;
  std::size_t seen = 0;
  for (const auto& row : ir.rows()) {
    const CellValue& cell = row[col];
    if (cell.is_missing() || (cell.is_text() && cell.as_text().empty())) continue;
    types.insert(infer_cell_type(cell));
    values.insert(serialize_cell(cell));
    ++seen;
  }
  // two values only read as a binary encoding once one of them repeats
  if (values.size() == 2 && seen > 2) return ColumnType::Boolean;
  if (types.size() > 1) return ColumnType::Ambiguous;
  if (types.empty()) return ColumnType::String;
  return *types.begin();
}

}  // namespace

ColumnSchema infer_schema(const IR& ir) {
  ColumnSchema schema;
  for (std::size_t c = 0; c < ir.column_count(); ++c) schema.set(ir.headers()[c], infer_column(ir, c));
  return schema;
}

ColumnSchema schema_for(const IR& ir, const ColumnSchema& known) {
  ColumnSchema schema;
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    const auto& name = ir.headers()[c];
    const auto type = known.find(name);
    schema.set(name, type ? *type : infer_column(ir, c));
  }
  return schema;
}

nlohmann::ordered_json schema_to_json(const ColumnSchema& schema) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, type] : schema.entries()) out[name] = std::string(to_string(type));
  return out;
}

ColumnSchema schema_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_object()) throw ContractViolation("schema must be a JSON object");
  ColumnSchema schema;
  for (auto it = json.begin(); it != json.end(); ++it) {
    if (!it.value().is_string()) throw ContractViolation("schema type for '" + it.key() + "' must be a string");
    schema.set(it.key(), column_type_from_string(it.value().get<std::string>()));
  }
  return schema;
}

}  // namespace flowetl
