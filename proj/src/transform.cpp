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

#include "flowetl/transform.hpp"

#include "flowetl/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <unordered_map>

namespace flowetl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view op_symbol(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

std::optional<ArithOp> op_from_symbol(std::string_view s) {
  if (s == "+") return ArithOp::Add;
  if (s == "-") return ArithOp::Sub;
  if (s == "*") return ArithOp::Mul;
  if (s == "/") return ArithOp::Div;
  return std::nullopt;
}

// ---- format patterns

struct FormatPiece {
  enum class Kind { Literal, Whole, Part, Fixed, Upper, Lower } kind = Kind::Literal;
  std::string literal;
  int arg = 0;
};

std::vector<FormatPiece> compile_pattern(std::string_view pattern) {
  std::vector<FormatPiece> pieces;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) pieces.push_back({FormatPiece::Kind::Literal, literal, 0});
    literal.clear();
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '}') {
      if (i + 1 < pattern.size() && pattern[i + 1] == '}') {
        literal.push_back('}');
        ++i;
        continue;
      }
      throw TransformError("format pattern: unmatched '}' at offset " + std::to_string(i));
    }
    if (c != '{') {
      literal.push_back(c);
      continue;
    }
    if (i + 1 < pattern.size() && pattern[i + 1] == '{') {
      literal.push_back('{');
      ++i;
      continue;
    }
    const auto close = pattern.find('}', i + 1);
    if (close == std::string_view::npos)
      throw TransformError("format pattern: unterminated '{' at offset " + std::to_string(i));
    const std::string_view spec = pattern.substr(i + 1, close - i - 1);
    flush();
    FormatPiece piece;
    if (spec.empty()) {
      piece.kind = FormatPiece::Kind::Whole;
    } else if (std::all_of(spec.begin(), spec.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
      if (spec.size() > 3) throw TransformError("format pattern: part index too large");
      piece.kind = FormatPiece::Kind::Part;
      piece.arg = std::stoi(std::string(spec));
    } else if (spec == ":upper") {
      piece.kind = FormatPiece::Kind::Upper;
    } else if (spec == ":lower") {
      piece.kind = FormatPiece::Kind::Lower;
    } else if (spec.size() >= 4 && spec.substr(0, 2) == ":." && spec.back() == 'f' &&
               std::all_of(spec.begin() + 2, spec.end() - 1, [](unsigned char ch) { return std::isdigit(ch); })) {
      piece.kind = FormatPiece::Kind::Fixed;
      const auto digits = spec.substr(2, spec.size() - 3);
      if (digits.size() > 2) throw TransformError("format pattern: too many decimals");
      piece.arg = std::stoi(std::string(digits));
      if (piece.arg > 17) throw TransformError("format pattern: too many decimals");
    } else {
      throw TransformError("format pattern: unknown placeholder '{" + std::string(spec) + "}'");
    }
    pieces.push_back(std::move(piece));
    i = close;
  }
  flush();
  return pieces;
}

std::vector<std::string> alnum_parts(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      parts.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::string render_format(const CellValue& value, std::string_view pattern) {
  const std::string text = display_text(value);
  std::optional<std::vector<std::string>> parts;
  std::string out;
  for (const auto& p : compile_pattern(pattern)) {
    switch (p.kind) {
      case FormatPiece::Kind::Literal: out += p.literal; break;
      case FormatPiece::Kind::Whole: out += text; break;
      case FormatPiece::Kind::Upper:
        for (unsigned char c : text) out.push_back(static_cast<char>(std::toupper(c)));
        break;
      case FormatPiece::Kind::Lower:
        for (unsigned char c : text) out.push_back(static_cast<char>(std::tolower(c)));
        break;
      case FormatPiece::Kind::Part: {
        if (!parts) parts = alnum_parts(text);
        if (static_cast<std::size_t>(p.arg) >= parts->size())
          throw TransformError("format: value '" + text + "' has no part " + std::to_string(p.arg));
        out += (*parts)[static_cast<std::size_t>(p.arg)];
        break;
      }
      case FormatPiece::Kind::Fixed: {
        const auto v = value.numeric();
        if (!v) throw TransformError("format: '" + text + "' is not numeric");
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%.*f", p.arg, *v);
        out += buf;
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> split_text(const std::string& s, const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

}  // namespace

// ---------------------------------------------------------------- Expr

Expr Expr::col(std::string name) { return Expr(Node(ColNode{std::move(name)})); }
Expr Expr::constant(CellValue value) { return Expr(Node(ConstNode{std::move(value)})); }
Expr Expr::concat(std::vector<Expr> parts, std::string separator) {
  return Expr(Node(ConcatNode{std::move(parts), std::move(separator)}));
}
Expr Expr::arith(ArithOp op, Expr left, Expr right) {
  return Expr(Node(std::make_shared<const ArithNode>(ArithNode{op, std::move(left), std::move(right)})));
}
Expr Expr::format(Expr arg, std::string pattern) {
  compile_pattern(pattern);
  return Expr(Node(std::make_shared<const FormatNode>(FormatNode{std::move(arg), std::move(pattern)})));
}
Expr Expr::map_lookup(Expr arg, std::map<std::string, CellValue> table, Expr fallback) {
  return Expr(
      Node(std::make_shared<const MapLookupNode>(MapLookupNode{std::move(arg), std::move(table), std::move(fallback)})));
}
Expr Expr::split(Expr arg, std::string separator, int index) {
  return Expr(Node(std::make_shared<const SplitNode>(SplitNode{std::move(arg), std::move(separator), index})));
}

std::size_t Expr::depth() const {
  return std::visit(overloaded{
                        [](const ColNode&) -> std::size_t { return 1; },
                        [](const ConstNode&) -> std::size_t { return 1; },
                        [](const ConcatNode& n) -> std::size_t {
                          std::size_t d = 0;
                          for (const auto& p : n.parts) d = std::max(d, p.depth());
                          return d + 1;
                        },
                        [](const std::shared_ptr<const ArithNode>& n) -> std::size_t {
                          return std::max(n->left.depth(), n->right.depth()) + 1;
                        },
                        [](const std::shared_ptr<const FormatNode>& n) -> std::size_t { return n->arg.depth() + 1; },
                        [](const std::shared_ptr<const MapLookupNode>& n) -> std::size_t {
                          return std::max(n->arg.depth(), n->fallback.depth()) + 1;
                        },
                        [](const std::shared_ptr<const SplitNode>& n) -> std::size_t { return n->arg.depth() + 1; },
                    },
                    node());
}

void Expr::collect_columns(std::set<std::string>& out) const {
  std::visit(overloaded{
                 [&](const ColNode& n) { out.insert(n.name); },
                 [](const ConstNode&) {},
                 [&](const ConcatNode& n) {
                   for (const auto& p : n.parts) p.collect_columns(out);
                 },
                 [&](const std::shared_ptr<const ArithNode>& n) {
                   n->left.collect_columns(out);
                   n->right.collect_columns(out);
                 },
                 [&](const std::shared_ptr<const FormatNode>& n) { n->arg.collect_columns(out); },
                 [&](const std::shared_ptr<const MapLookupNode>& n) {
                   n->arg.collect_columns(out);
                   n->fallback.collect_columns(out);
                 },
                 [&](const std::shared_ptr<const SplitNode>& n) { n->arg.collect_columns(out); },
             },
             node());
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.index() != nb.index()) return false;
  return std::visit(
      overloaded{
          [&](const ColNode& x) { return x.name == std::get<ColNode>(nb).name; },
          [&](const ConstNode& x) { return x.value == std::get<ConstNode>(nb).value; },
          [&](const ConcatNode& x) {
            const auto& y = std::get<ConcatNode>(nb);
            return x.separator == y.separator && x.parts == y.parts;
          },
          [&](const std::shared_ptr<const ArithNode>& x) {
            const auto& y = std::get<std::shared_ptr<const ArithNode>>(nb);
            return x->op == y->op && x->left == y->left && x->right == y->right;
          },
          [&](const std::shared_ptr<const FormatNode>& x) {
            const auto& y = std::get<std::shared_ptr<const FormatNode>>(nb);
            return x->pattern == y->pattern && x->arg == y->arg;
          },
          [&](const std::shared_ptr<const MapLookupNode>& x) {
            const auto& y = std::get<std::shared_ptr<const MapLookupNode>>(nb);
            return x->table == y->table && x->arg == y->arg && x->fallback == y->fallback;
          },
          [&](const std::shared_ptr<const SplitNode>& x) {
            const auto& y = std::get<std::shared_ptr<const SplitNode>>(nb);
            return x->separator == y->separator && x->index == y->index && x->arg == y->arg;
          },
      },
      na);
}

std::string describe(const Expr& expr) {
  return std::visit(
      overloaded{
          [](const ColNode& n) { return "col(" + n.name + ")"; },
          [](const ConstNode& n) { return "const(" + cell_to_json(n.value).dump() + ")"; },
          [](const ConcatNode& n) {
            std::string out = "concat(";
            for (const auto& p : n.parts) out += describe(p) + ", ";
            return out + "sep=" + nlohmann::json(n.separator).dump() + ")";
          },
          [](const std::shared_ptr<const ArithNode>& n) {
            return "(" + describe(n->left) + " " + std::string(op_symbol(n->op)) + " " + describe(n->right) + ")";
          },
          [](const std::shared_ptr<const FormatNode>& n) {
            return "format(" + describe(n->arg) + ", " + nlohmann::json(n->pattern).dump() + ")";
          },
          [](const std::shared_ptr<const MapLookupNode>& n) {
            return "map(" + describe(n->arg) + ", " + std::to_string(n->table.size()) + " entries, default=" +
                   describe(n->fallback) + ")";
          },
          [](const std::shared_ptr<const SplitNode>& n) {
            return "split(" + describe(n->arg) + ", " + nlohmann::json(n->separator).dump() + ", " +
                   std::to_string(n->index) + ")";
          },
      },
      expr.node());
}

namespace {

// Arithmetic over a single column and constants.
bool is_affine(const Expr& e, std::set<std::string>& cols) {
  if (const auto* c = std::get_if<ColNode>(&e.node())) {
    cols.insert(c->name);
    return true;
  }
  if (const auto* k = std::get_if<ConstNode>(&e.node())) return k->value.is_number();
  if (const auto* a = std::get_if<std::shared_ptr<const ArithNode>>(&e.node()))
    return is_affine((*a)->left, cols) && is_affine((*a)->right, cols);
  return false;
}

}  // namespace

std::string expr_kind(const Expr& expr) {
  return std::visit(overloaded{
                        [](const ColNode&) -> std::string { return "identity"; },
                        [](const ConstNode&) -> std::string { return "const"; },
                        [](const ConcatNode&) -> std::string { return "concat"; },
                        [&](const std::shared_ptr<const ArithNode>&) -> std::string {
                          std::set<std::string> cols;
                          return is_affine(expr, cols) && cols.size() == 1 ? "affine" : "arith";
                        },
                        [](const std::shared_ptr<const FormatNode>&) -> std::string { return "format"; },
                        [](const std::shared_ptr<const MapLookupNode>&) -> std::string { return "map"; },
                        [](const std::shared_ptr<const SplitNode>&) -> std::string { return "split"; },
                    },
                    expr.node());
}

const ProgramEntry* TransformationProgram::find(std::string_view target) const {
  for (const auto& e : entries)
    if (e.target == target) return &e;
  return nullptr;
}

TransformationProgram identity_program(const SchemaMap& map) {
  TransformationProgram program;
  for (const auto& c : map.correspondences)
    if (!c.sources.empty()) program.entries.push_back({c.target, Expr::col(c.sources.front())});
  return program;
}

// ---------------------------------------------------------------- eval

CellValue eval_expr(const Expr& expr, const ColumnLookup& lookup, EvalStats* stats) {
  return std::visit(
      overloaded{
          [&](const ColNode& n) -> CellValue {
            const CellValue* v = lookup(n.name);
            if (!v) throw TransformError("unknown column '" + n.name + "'");
            return *v;
          },
          [](const ConstNode& n) -> CellValue { return n.value; },
          [&](const ConcatNode& n) -> CellValue {
            std::string out;
            for (std::size_t i = 0; i < n.parts.size(); ++i) {
              const CellValue v = eval_expr(n.parts[i], lookup, stats);
              if (v.is_missing()) return CellValue::missing();
              if (i) out += n.separator;
              out += display_text(v);
            }
            return CellValue::text(std::move(out));
          },
          [&](const std::shared_ptr<const ArithNode>& n) -> CellValue {
            const CellValue l = eval_expr(n->left, lookup, stats);
            const CellValue r = eval_expr(n->right, lookup, stats);
            if (l.is_missing() || r.is_missing()) return CellValue::missing();
            const auto a = l.numeric();
            const auto b = r.numeric();
            if (!a || !b)
              throw TransformError("arithmetic on non-numeric value '" + display_text(a ? r : l) + "'");
            switch (n->op) {
              case ArithOp::Add: return CellValue::number(*a + *b);
              case ArithOp::Sub: return CellValue::number(*a - *b);
              case ArithOp::Mul: return CellValue::number(*a * *b);
              case ArithOp::Div:
                if (*b == 0.0) {
                  if (stats) ++stats->division_by_zero;
                  return CellValue::missing();
                }
                return CellValue::number(*a / *b);
            }
            return CellValue::missing();
          },
          [&](const std::shared_ptr<const FormatNode>& n) -> CellValue {
            const CellValue v = eval_expr(n->arg, lookup, stats);
            if (v.is_missing()) return v;
            return CellValue::text(render_format(v, n->pattern));
          },
          [&](const std::shared_ptr<const MapLookupNode>& n) -> CellValue {
            const CellValue v = eval_expr(n->arg, lookup, stats);
            if (v.is_missing()) return v;
            auto it = n->table.find(display_text(v));
            if (it != n->table.end()) return it->second;
            return eval_expr(n->fallback, lookup, stats);
          },
          [&](const std::shared_ptr<const SplitNode>& n) -> CellValue {
            const CellValue v = eval_expr(n->arg, lookup, stats);
            if (v.is_missing()) return v;
            const std::string text = display_text(v);
            const auto parts = split_text(text, n->separator);
            const auto size = static_cast<long>(parts.size());
            const long idx = n->index < 0 ? size + n->index : n->index;
            if (idx < 0 || idx >= size)
              throw TransformError("split: '" + text + "' has no part " + std::to_string(n->index));
            return CellValue::text(parts[static_cast<std::size_t>(idx)]);
          },
      },
      expr.node());
}

CellValue eval_expr(const Expr& expr, const std::map<std::string, CellValue>& row, EvalStats* stats) {
  return eval_expr(
      expr,
      [&](std::string_view name) -> const CellValue* {
        auto it = row.find(std::string(name));
        return it == row.end() ? nullptr : &it->second;
      },
      stats);
}

std::vector<std::string> validate_program(const TransformationProgram& program,
                                          const std::vector<std::string>& source_columns, const SchemaMap& map) {
  std::vector<std::string> violations;
  const std::set<std::string> available(source_columns.begin(), source_columns.end());
  std::set<std::string> targets;
  for (const auto& e : program.entries) {
    if (!targets.insert(e.target).second) violations.push_back("target '" + e.target + "' defined twice");
    if (!map.find_target(e.target)) violations.push_back("target '" + e.target + "' is not in the schema map");
    if (e.expr.depth() > kMaxExprDepth) violations.push_back("expression for '" + e.target + "' is too deep");
    std::set<std::string> cols;
    e.expr.collect_columns(cols);
    for (const auto& c : cols)
      if (!available.count(c)) violations.push_back("expression for '" + e.target + "' references unknown column '" + c + "'");
  }
  for (const auto& c : map.correspondences)
    if (!targets.count(c.target)) violations.push_back("no expression for mapped target '" + c.target + "'");
  return violations;
}

TransformOutcome apply_transform_program(const IR& ir, const TransformationProgram& program, const SchemaMap& map,
                                         double max_failed_share) {
  const auto violations = validate_program(program, ir.headers(), map);
  if (!violations.empty()) throw TransformError("invalid transformation program: " + violations.front());

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < ir.column_count(); ++c) index.emplace(ir.headers()[c], c);

  std::vector<std::string> headers;
  std::vector<const Expr*> exprs;
  for (const auto& c : map.correspondences) {
    headers.push_back(c.target);
    exprs.push_back(&program.find(c.target)->expr);
  }

  TransformOutcome outcome;
  EvalStats stats;
  std::vector<Row> rows;
  rows.reserve(ir.row_count());
  for (const auto& src : ir.rows()) {
    const ColumnLookup lookup = [&](std::string_view name) -> const CellValue* {
      auto it = index.find(std::string(name));
      return it == index.end() ? nullptr : &src[it->second];
    };
    Row out;
    out.reserve(exprs.size());
    for (const Expr* e : exprs) {
      try {
        out.push_back(eval_expr(*e, lookup, &stats));
      } catch (const TransformError& err) {
        ++outcome.failed_cells;
        if (outcome.errors.size() < 20) outcome.errors.emplace_back(err.what());
        out.push_back(CellValue::missing());
      }
    }
    rows.push_back(std::move(out));
  }

  const std::size_t cells = ir.row_count() * exprs.size();
  if (cells > 0 && static_cast<double>(outcome.failed_cells) > max_failed_share * static_cast<double>(cells)) {
    throw TransformError("transformation aborted: " + std::to_string(outcome.failed_cells) + " of " +
                         std::to_string(cells) + " cells failed" +
                         (outcome.errors.empty() ? std::string() : " (first: " + outcome.errors.front() + ")"));
  }
  outcome.division_by_zero = stats.division_by_zero;
  outcome.ir = IR(std::move(headers), std::move(rows));
  return outcome;
}

// ---------------------------------------------------------------- JSON

nlohmann::ordered_json expr_to_json(const Expr& expr) {
  using ojson = nlohmann::ordered_json;
  return std::visit(
      overloaded{
          [](const ColNode& n) { return ojson{{"op", "col"}, {"name", n.name}}; },
          [](const ConstNode& n) { return ojson{{"op", "const"}, {"value", cell_to_json(n.value)}}; },
          [](const ConcatNode& n) {
            ojson args = ojson::array();
            for (const auto& p : n.parts) args.push_back(expr_to_json(p));
            return ojson{{"op", "concat"}, {"args", std::move(args)}, {"sep", n.separator}};
          },
          [](const std::shared_ptr<const ArithNode>& n) {
            return ojson{{"op", "arith"},
                         {"fn", std::string(op_symbol(n->op))},
                         {"left", expr_to_json(n->left)},
                         {"right", expr_to_json(n->right)}};
          },
          [](const std::shared_ptr<const FormatNode>& n) {
            return ojson{{"op", "format"}, {"arg", expr_to_json(n->arg)}, {"pattern", n->pattern}};
          },
          [](const std::shared_ptr<const MapLookupNode>& n) {
            ojson table = ojson::object();
            for (const auto& [k, v] : n->table) table[k] = cell_to_json(v);
            return ojson{{"op", "map"},
                         {"arg", expr_to_json(n->arg)},
                         {"table", std::move(table)},
                         {"default", expr_to_json(n->fallback)}};
          },
          [](const std::shared_ptr<const SplitNode>& n) {
            return ojson{{"op", "split"}, {"arg", expr_to_json(n->arg)}, {"sep", n->separator}, {"index", n->index}};
          },
      },
      expr.node());
}

nlohmann::ordered_json program_to_json(const TransformationProgram& program) {
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const auto& e : program.entries) columns.push_back({{"target", e.target}, {"expr", expr_to_json(e.expr)}});
  return {{"version", 1}, {"columns", std::move(columns)}};
}

namespace {

using ojson = nlohmann::ordered_json;

const ojson& field(const ojson& j, const char* name, const std::string& path) {
  if (!j.contains(name)) throw ProgramParseError(path, std::string("missing field '") + name + "'");
  return j[name];
}

std::string string_field(const ojson& j, const char* name, const std::string& path) {
  const auto& v = field(j, name, path);
  if (!v.is_string()) throw ProgramParseError(path + "/" + name, "expected a string");
  return v.get<std::string>();
}

Expr parse_expr(const ojson& j, const std::string& path, std::size_t depth) {
  if (depth > kMaxExprDepth)
    throw ProgramParseError(path, "expression deeper than " + std::to_string(kMaxExprDepth) + " levels");
  if (!j.is_object()) throw ProgramParseError(path, "expected an expression object");
  const std::string op = string_field(j, "op", path);

  if (op == "col") {
    auto name = string_field(j, "name", path);
    if (name.empty()) throw ProgramParseError(path + "/name", "empty column name");
    return Expr::col(std::move(name));
  }
  if (op == "const") return Expr::constant(cell_from_json(field(j, "value", path)));
  if (op == "concat") {
    const auto& args = field(j, "args", path);
    if (!args.is_array() || args.empty()) throw ProgramParseError(path + "/args", "expected a non-empty array");
    std::vector<Expr> parts;
    for (std::size_t i = 0; i < args.size(); ++i)
      parts.push_back(parse_expr(args[i], path + "/args/" + std::to_string(i), depth + 1));
    std::string sep;
    if (j.contains("sep")) sep = string_field(j, "sep", path);
    return Expr::concat(std::move(parts), std::move(sep));
  }
  if (op == "arith") {
    const auto fn = string_field(j, "fn", path);
    const auto parsed = op_from_symbol(fn);
    if (!parsed) throw ProgramParseError(path + "/fn", "unknown arithmetic operator '" + fn + "'");
    return Expr::arith(*parsed, parse_expr(field(j, "left", path), path + "/left", depth + 1),
                       parse_expr(field(j, "right", path), path + "/right", depth + 1));
  }
  if (op == "format") {
    auto pattern = string_field(j, "pattern", path);
    try {
      compile_pattern(pattern);
    } catch (const TransformError& e) {
      throw ProgramParseError(path + "/pattern", e.what());
    }
    return Expr::format(parse_expr(field(j, "arg", path), path + "/arg", depth + 1), std::move(pattern));
  }
  if (op == "map") {
    const auto& table = field(j, "table", path);
    if (!table.is_object()) throw ProgramParseError(path + "/table", "expected an object");
    std::map<std::string, CellValue> entries;
    for (auto it = table.begin(); it != table.end(); ++it) entries.emplace(it.key(), cell_from_json(it.value()));
    Expr arg = parse_expr(field(j, "arg", path), path + "/arg", depth + 1);
    Expr fallback = j.contains("default") ? parse_expr(j["default"], path + "/default", depth + 1)
                                          : Expr::constant(CellValue::missing());
    return Expr::map_lookup(std::move(arg), std::move(entries), std::move(fallback));
  }
  if (op == "split") {
    auto sep = string_field(j, "sep", path);
    if (sep.empty()) throw ProgramParseError(path + "/sep", "empty separator");
    const auto& index = field(j, "index", path);
    if (!index.is_number_integer()) throw ProgramParseError(path + "/index", "expected an integer");
    return Expr::split(parse_expr(field(j, "arg", path), path + "/arg", depth + 1), std::move(sep),
                       index.get<int>());
  }
  throw ProgramParseError(path + "/op", "unknown op '" + op + "'");
}

}  // namespace

Expr expr_from_json(const nlohmann::ordered_json& json) { return parse_expr(json, "", 1); }

TransformationProgram program_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_object()) throw ProgramParseError("", "expected a program object");
  const auto& columns = field(json, "columns", "");
  if (!columns.is_array()) throw ProgramParseError("/columns", "expected an array");
  TransformationProgram program;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::string path = "/columns/" + std::to_string(i);
    const auto& c = columns[i];
    if (!c.is_object()) throw ProgramParseError(path, "expected an object");
    auto target = string_field(c, "target", path);
    if (target.empty()) throw ProgramParseError(path + "/target", "empty target name");
    if (program.find(target)) throw ProgramParseError(path + "/target", "target '" + target + "' defined twice");
    program.entries.push_back({std::move(target), parse_expr(field(c, "expr", path), path + "/expr", 1)});
  }
  return program;
}

TransformationProgram parse_program(std::string_view text) {
  ojson json;
  try {
    json = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ProgramParseError("", std::string("syntax error at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  return program_from_json(json);
}

}  // namespace flowetl
