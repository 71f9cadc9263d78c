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
#include "flowetl/schema_match.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flowetl {

enum class ArithOp { Add, Sub, Mul, Div };

inline constexpr std::size_t kMaxExprDepth = 32;
/// apply_transform_program aborts when more than this share of cells fails.
inline constexpr double kMaxFailedCellShare = 0.10;

class Expr;

struct ColNode {
  std::string name;
};
struct ConstNode {
  CellValue value;
};
struct ConcatNode {
  std::vector<Expr> parts;
  std::string separator;
};
struct ArithNode;
struct FormatNode;
struct MapLookupNode;
struct SplitNode;

/// Immutable expression tree of the transformation DSL. Copies share nodes.
class Expr {
 public:
  using Node = std::variant<ColNode, ConstNode, ConcatNode, std::shared_ptr<const ArithNode>,
                            std::shared_ptr<const FormatNode>, std::shared_ptr<const MapLookupNode>,
                            std::shared_ptr<const SplitNode>>;

  static Expr col(std::string name);
  static Expr constant(CellValue value);
  static Expr concat(std::vector<Expr> parts, std::string separator = "");
  static Expr arith(ArithOp op, Expr left, Expr right);
  /// Pattern placeholders: {} whole value, {N} N-th alphanumeric part,
  /// {:.Nf} fixed decimals, {:upper}, {:lower}; {{ and }} escape braces.
  /// Throws TransformError on a malformed pattern.
  static Expr format(Expr arg, std::string pattern);
  /// Looks the argument's display text up in `table`; unmatched keys
  /// evaluate `fallback`.
  static Expr map_lookup(Expr arg, std::map<std::string, CellValue> table, Expr fallback);
  /// Part `index` of the argument split on `separator`; negative indexes
  /// count from the end.
  static Expr split(Expr arg, std::string separator, int index);

  const Node& node() const noexcept { return *node_; }
  std::size_t depth() const;
  void collect_columns(std::set<std::string>& out) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}
  std::shared_ptr<const Node> node_;
};

struct ArithNode {
  ArithOp op;
  Expr left;
  Expr right;
};
struct FormatNode {
  Expr arg;
  std::string pattern;
};
struct MapLookupNode {
  Expr arg;
  std::map<std::string, CellValue> table;
  Expr fallback;
};
struct SplitNode {
  Expr arg;
  std::string separator;
  int index;
};

/// Short human-readable rendering, e.g. concat(col(first), col(last), sep=" ").
std::string describe(const Expr& expr);
/// Coarse class of an expression: identity, const, concat, affine, arith,
/// format, map, split.
std::string expr_kind(const Expr& expr);

struct ProgramEntry {
  std::string target;
  Expr expr;

  friend bool operator==(const ProgramEntry&, const ProgramEntry&) = default;
};

/// One expression per mapped target column.
struct TransformationProgram {
  std::vector<ProgramEntry> entries;

  const ProgramEntry* find(std::string_view target) const;
  friend bool operator==(const TransformationProgram&, const TransformationProgram&) = default;
};

/// Identity program: each target reads its first source column.
TransformationProgram identity_program(const SchemaMap& map);

struct EvalStats {
  std::size_t division_by_zero = 0;
};

using ColumnLookup = std::function<const CellValue*(std::string_view)>;

/// Strict evaluation with Missing propagation. Division by zero yields
/// Missing and bumps `stats`. Unknown columns, non-numeric arithmetic and
/// out-of-range splits throw TransformError.
CellValue eval_expr(const Expr& expr, const ColumnLookup& lookup, EvalStats* stats = nullptr);
CellValue eval_expr(const Expr& expr, const std::map<std::string, CellValue>& row, EvalStats* stats = nullptr);

/// Empty when every referenced column exists, targets are distinct and the
/// program covers exactly the mapped targets.
std::vector<std::string> validate_program(const TransformationProgram& program,
                                          const std::vector<std::string>& source_columns, const SchemaMap& map);

struct TransformOutcome {
  IR ir;
  std::size_t failed_cells = 0;
  std::size_t division_by_zero = 0;
  std::vector<std::string> errors;  // first few per-cell failures
};

/// Output headers are the mapped targets in map order. Failing cells become
/// Missing. Throws TransformError on validation failure or when more than
/// `max_failed_share` of the cells fail.
TransformOutcome apply_transform_program(const IR& ir, const TransformationProgram& program, const SchemaMap& map,
                                         double max_failed_share = kMaxFailedCellShare);

nlohmann::ordered_json expr_to_json(const Expr& expr);
nlohmann::ordered_json program_to_json(const TransformationProgram& program);
/// Throws ProgramParseError (JSON pointer + reason) on unknown ops, wrong
/// field types, malformed patterns or trees deeper than kMaxExprDepth.
Expr expr_from_json(const nlohmann::ordered_json& json);
TransformationProgram program_from_json(const nlohmann::ordered_json& json);
TransformationProgram parse_program(std::string_view text);

}  // namespace flowetl
