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

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace flowetl {

enum class NodeKind { MVH, DRH, NOH };

enum class Strategy {
  None,          // DRH
  Impute,        // MVH
  DropRows,      // MVH
  DropColumns,   // MVH
  ImputeMedian,  // NOH
  DropRow,       // NOH
};

std::string_view to_string(NodeKind kind);
std::string_view to_string(Strategy strategy);

/// A node kind paired with a strategy valid for that kind.
class NodeSpec {
 public:
  /// Throws ContractViolation when the strategy does not belong to the kind.
  NodeSpec(NodeKind kind, Strategy strategy);

  static NodeSpec mvh(Strategy s) { return {NodeKind::MVH, s}; }
  static NodeSpec drh() { return {NodeKind::DRH, Strategy::None}; }
  static NodeSpec noh(Strategy s) { return {NodeKind::NOH, s}; }

  NodeKind kind() const noexcept { return kind_; }
  Strategy strategy() const noexcept { return strategy_; }
  std::string label() const;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;

 private:
  NodeKind kind_;
  Strategy strategy_;
};

/// The six (kind, strategy) variants.
std::array<NodeSpec, 6> all_node_variants();

/// A linear chain holding each node kind exactly once.
class PlanSteps {
 public:
  /// Throws ContractViolation unless there are three steps of distinct kinds.
  explicit PlanSteps(std::vector<NodeSpec> steps);

  const std::vector<NodeSpec>& steps() const noexcept { return steps_; }
  std::string label() const;

  friend bool operator==(const PlanSteps&, const PlanSteps&) = default;

 private:
  std::vector<NodeSpec> steps_;
};

nlohmann::ordered_json node_to_json(const NodeSpec& spec);
NodeSpec node_from_json(const nlohmann::ordered_json& json);
nlohmann::ordered_json steps_to_json(const PlanSteps& steps);
PlanSteps steps_from_json(const nlohmann::ordered_json& json);

/// Placeholder written into Missing string/ambiguous cells by MVH impute.
inline constexpr std::string_view kUnknownPlaceholder = "unknown";

/// impute: number → column median (0 when the column has no values),
/// string/ambiguous → "unknown", boolean → column mode, complex → [].
/// drop_rows / drop_columns remove anything holding a Missing cell; dropping
/// every column throws NodeError.
IR apply_mvh(const IR& ir, const ColumnSchema& schema, Strategy strategy);

/// Keeps the first occurrence of each row (column-order-insensitive identity).
IR apply_drh(const IR& ir);

/// MAD bounds per number column. Throws NodeError if a number column holds
/// a Missing cell.
IR apply_noh(const IR& ir, const ColumnSchema& schema, Strategy strategy);

IR apply_node(const IR& ir, const ColumnSchema& schema, const NodeSpec& spec);

/// Runs the chain in order, narrowing the schema when MVH drops columns.
IR apply_steps(const IR& ir, const ColumnSchema& schema, const PlanSteps& steps);

}  // namespace flowetl
