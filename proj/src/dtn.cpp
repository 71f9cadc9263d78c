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

#include "flowetl/dtn.hpp"

#include "flowetl/errors.hpp"
#include "flowetl/quality.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace flowetl {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::MVH: return "MVH";
    case NodeKind::DRH: return "DRH";
    case NodeKind::NOH: return "NOH";
  }
  return "?";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::None: return "none";
    case Strategy::Impute: return "impute";
    case Strategy::DropRows: return "drop_rows";
    case Strategy::DropColumns: return "drop_columns";
    case Strategy::ImputeMedian: return "impute_median";
    case Strategy::DropRow: return "drop_row";
  }
  return "?";
}

namespace {

bool strategy_fits(NodeKind kind, Strategy s) {
  switch (kind) {
    case NodeKind::MVH: return s == Strategy::Impute || s == Strategy::DropRows || s == Strategy::DropColumns;
    case NodeKind::DRH: return s == Strategy::None;
    case NodeKind::NOH: return s == Strategy::ImputeMedian || s == Strategy::DropRow;
  }
  return false;
}

}  // namespace

NodeSpec::NodeSpec(NodeKind kind, Strategy strategy) : kind_(kind), strategy_(strategy) {
  if (!strategy_fits(kind, strategy)) {
    throw ContractViolation("strategy " + std::string(to_string(strategy)) + " is not valid for " +
                            std::string(to_string(kind)));
  }
}

std::string NodeSpec::label() const {
  std::string out(to_string(kind_));
  if (strategy_ != Strategy::None) out += "(" + std::string(to_string(strategy_)) + ")";
  return out;
}

std::array<NodeSpec, 6> all_node_variants() {
  return {NodeSpec::mvh(Strategy::Impute),       NodeSpec::mvh(Strategy::DropRows),
          NodeSpec::mvh(Strategy::DropColumns),  NodeSpec::drh(),
          NodeSpec::noh(Strategy::ImputeMedian), NodeSpec::noh(Strategy::DropRow)};
}

PlanSteps::PlanSteps(std::vector<NodeSpec> steps) : steps_(std::move(steps)) {
  if (steps_.size() != 3) throw ContractViolation("a plan needs exactly three steps");
  std::unordered_set<int> kinds;
  for (const auto& s : steps_) kinds.insert(static_cast<int>(s.kind()));
  if (kinds.size() != 3) throw ContractViolation("plan steps must use each node kind once");
}

std::string PlanSteps::label() const {
  std::string out;
  for (const auto& s : steps_) {
    if (!out.empty()) out += " -> ";
    out += s.label();
  }
  return out;
}

nlohmann::ordered_json node_to_json(const NodeSpec& spec) {
  nlohmann::ordered_json j;
  j["node"] = std::string(to_string(spec.kind()));
  if (spec.strategy() == Strategy::None) {
    j["strategy"] = nullptr;
  } else {
    j["strategy"] = std::string(to_string(spec.strategy()));
  }
  return j;
}

NodeSpec node_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_object() || !json.contains("node") || !json["node"].is_string())
    throw ContractViolation("node spec needs a string 'node' field");
  const auto node = json["node"].get<std::string>();
  NodeKind kind;
  if (node == "MVH") {
    kind = NodeKind::MVH;
  } else if (node == "DRH") {
    kind = NodeKind::DRH;
  } else if (node == "NOH") {
    kind = NodeKind::NOH;
  } else {
    throw ContractViolation("unknown node '" + node + "'");
  }
  Strategy strategy = Strategy::None;
  if (json.contains("strategy") && !json["strategy"].is_null()) {
    if (!json["strategy"].is_string()) throw ContractViolation("strategy must be a string or null");
    const auto s = json["strategy"].get<std::string>();
    static const std::map<std::string, Strategy> names = {
        {"impute", Strategy::Impute},           {"drop_rows", Strategy::DropRows},
        {"drop_columns", Strategy::DropColumns}, {"impute_median", Strategy::ImputeMedian},
        {"drop_row", Strategy::DropRow}};
    auto it = names.find(s);
    if (it == names.end()) throw ContractViolation("unknown strategy '" + s + "'");
    strategy = it->second;
  }
  return NodeSpec(kind, strategy);
}

nlohmann::ordered_json steps_to_json(const PlanSteps& steps) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& s : steps.steps()) out.push_back(node_to_json(s));
  return out;
}

PlanSteps steps_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_array()) throw ContractViolation("plan steps must be an array");
  std::vector<NodeSpec> steps;
  for (const auto& j : json) steps.push_back(node_from_json(j));
  return PlanSteps(std::move(steps));
}

// ---------------------------------------------------------------- MVH

namespace {

CellValue impute_value(const IR& ir, std::size_t col, ColumnType type) {
  switch (type) {
    case ColumnType::Number: {
      std::vector<double> values;
      for (const auto& row : ir.rows())
        if (auto v = row[col].numeric()) values.push_back(*v);
      return CellValue::number(values.empty() ? 0.0 : median(std::move(values)));
    }
    case ColumnType::Boolean: {
      // Mode; ties go to the smaller serialized value.
      std::map<std::string, std::pair<std::size_t, CellValue>> counts;
      for (const auto& row : ir.rows()) {
        if (row[col].is_missing()) continue;
        auto& slot = counts[serialize_cell(row[col])];
        if (slot.first++ == 0) slot.second = row[col];
      }
      const std::pair<std::size_t, CellValue>* best = nullptr;
      for (const auto& [key, entry] : counts)
        if (!best || entry.first > best->first) best = &entry;
      if (best) return best->second;
      return CellValue::text(std::string(kUnknownPlaceholder));
    }
    case ColumnType::Complex:
      return CellValue::complex(ComplexValue(nlohmann::json::array()));
    case ColumnType::String:
    case ColumnType::Ambiguous:
      break;
  }
  return CellValue::text(std::string(kUnknownPlaceholder));
}

ColumnType type_or_string(const ColumnSchema& schema, const std::string& name) {
  return schema.find(name).value_or(ColumnType::String);
}

}  // namespace

IR apply_mvh(const IR& ir, const ColumnSchema& schema, Strategy strategy) {
  switch (strategy) {
    case Strategy::Impute: {
      std::vector<CellValue> fill(ir.column_count());
      std::vector<bool> computed(ir.column_count(), false);
      std::vector<Row> rows = ir.rows();
      for (auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (!row[c].is_missing()) continue;
          if (!computed[c]) {
            fill[c] = impute_value(ir, c, type_or_string(schema, ir.headers()[c]));
            computed[c] = true;
          }
          row[c] = fill[c];
        }
      }
      return IR(ir.headers(), std::move(rows));
    }
    case Strategy::DropRows: {
      std::vector<Row> rows;
      for (const auto& row : ir.rows()) {
        if (std::none_of(row.begin(), row.end(), [](const CellValue& c) { return c.is_missing(); }))
          rows.push_back(row);
      }
      return IR(ir.headers(), std::move(rows));
    }
    case Strategy::DropColumns: {
      std::vector<std::size_t> keep;
      for (std::size_t c = 0; c < ir.column_count(); ++c) {
        const bool has_missing =
            std::any_of(ir.rows().begin(), ir.rows().end(), [c](const Row& r) { return r[c].is_missing(); });
        if (!has_missing) keep.push_back(c);
      }
      if (keep.empty() && ir.column_count() > 0) throw NodeError("MVH drop_columns: degenerate result, every column holds a Missing cell");
      std::vector<std::string> headers;
      for (auto c : keep) headers.push_back(ir.headers()[c]);
      std::vector<Row> rows;
      rows.reserve(ir.row_count());
      for (const auto& row : ir.rows()) {
        Row r;
        r.reserve(keep.size());
        for (auto c : keep) r.push_back(row[c]);
        rows.push_back(std::move(r));
      }
      return IR(std::move(headers), std::move(rows));
    }
    default:
      throw ContractViolation("invalid MVH strategy " + std::string(to_string(strategy)));
  }
}

// ---------------------------------------------------------------- DRH

IR apply_drh(const IR& ir) {
  std::unordered_set<std::string> seen;
  seen.reserve(ir.row_count());
  std::vector<Row> rows;
  for (const auto& row : ir.rows())
    if (seen.insert(row_key(ir, row)).second) rows.push_back(row);
  return IR(ir.headers(), std::move(rows));
}

// ---------------------------------------------------------------- NOH

IR apply_noh(const IR& ir, const ColumnSchema& schema, Strategy strategy) {
  if (strategy != Strategy::ImputeMedian && strategy != Strategy::DropRow)
    throw ContractViolation("invalid NOH strategy " + std::string(to_string(strategy)));

  std::vector<std::pair<std::size_t, MadBounds>> columns;
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    if (schema.find(ir.headers()[c]) != ColumnType::Number) continue;
    for (const auto& row : ir.rows()) {
      if (row[c].is_missing())
        throw NodeError("NOH does not support null values (column '" + ir.headers()[c] + "')");
    }
    if (auto bounds = column_bounds(ir, c)) columns.emplace_back(c, *bounds);
  }

  std::vector<Row> rows;
  rows.reserve(ir.row_count());
  for (const auto& row : ir.rows()) {
    Row out = row;
    bool drop = false;
    for (const auto& [c, bounds] : columns) {
      const auto v = row[c].numeric();
      if (!v || !bounds.is_outlier(*v)) continue;
      if (strategy == Strategy::DropRow) {
        drop = true;
        break;
      }
      out[c] = CellValue::number(bounds.median);
    }
    if (!drop) rows.push_back(std::move(out));
  }
  return IR(ir.headers(), std::move(rows));
}

IR apply_node(const IR& ir, const ColumnSchema& schema, const NodeSpec& spec) {
  switch (spec.kind()) {
    case NodeKind::MVH: return apply_mvh(ir, schema, spec.strategy());
    case NodeKind::DRH: return apply_drh(ir);
    case NodeKind::NOH: return apply_noh(ir, schema, spec.strategy());
  }
  throw ContractViolation("unknown node kind");
}

IR apply_steps(const IR& ir, const ColumnSchema& schema, const PlanSteps& steps) {
  IR current = ir;
  ColumnSchema current_schema = schema_for(ir, schema);
  for (const auto& step : steps.steps()) {
    current = apply_node(current, current_schema, step);
    if (current.column_count() != current_schema.size()) current_schema = current_schema.restricted_to(current.headers());
  }
  return current;
}

}  // namespace flowetl
