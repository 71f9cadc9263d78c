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

#include "flowetl/inference.hpp"

#include "flowetl/dtn.hpp"
#include "flowetl/errors.hpp"
#include "flowetl/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

namespace flowetl {

namespace {

using Texts = std::vector<std::vector<std::string>>;

Texts display_texts(const IR& ir) {
  Texts out;
  out.reserve(ir.row_count());
  for (const auto& row : ir.rows()) {
    std::vector<std::string> r;
    r.reserve(row.size());
    for (const auto& cell : row) r.push_back(cell.is_missing() ? std::string() : display_text(cell));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<bool>> trust_mask(const IR& ir, bool mark_imputed) {
  std::vector<std::vector<bool>> mask(ir.row_count(), std::vector<bool>(ir.column_count(), true));
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    std::optional<double> med;
    if (mark_imputed) {
      std::vector<double> values;
      bool numeric = true;
      for (const auto& row : ir.rows()) {
        if (row[c].is_missing()) continue;
        if (!row[c].is_number()) {
          numeric = false;
          break;
        }
        values.push_back(row[c].as_number());
      }
      if (numeric && !values.empty()) med = median(values);
    }
    for (std::size_t r = 0; r < ir.row_count(); ++r) {
      const CellValue& cell = ir.rows()[r][c];
      if (cell.is_missing()) {
        mask[r][c] = false;
      } else if (mark_imputed) {
        if (cell.is_text() && cell.as_text() == kUnknownPlaceholder) mask[r][c] = false;
        if (med && cell.is_number() && cell.as_number() == *med) mask[r][c] = false;
      }
    }
  }
  return mask;
}

struct Columns {
  std::vector<std::size_t> sources;
  std::size_t target = 0;
};

std::optional<Columns> resolve(const Correspondence& c, const IR& source, const IR& target) {
  Columns cols;
  const auto t = target.column_index(c.target);
  if (!t) return std::nullopt;
  cols.target = *t;
  for (const auto& s : c.sources) {
    const auto i = source.column_index(s);
    if (!i) return std::nullopt;
    cols.sources.push_back(*i);
  }
  return cols;
}

// ---- hypothesis checking over example rows

class ExampleSet {
 public:
  ExampleSet(const IR& source, const IR& target, std::size_t target_col, std::vector<std::size_t> rows)
      : source_(source), target_(target), target_col_(target_col), rows_(std::move(rows)) {}

  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::size_t>& rows() const { return rows_; }
  const CellValue& expected(std::size_t r) const { return target_.rows()[r][target_col_]; }
  const CellValue& input(std::size_t r, std::size_t col) const { return source_.rows()[r][col]; }

  bool reproduces(const Expr& expr) const {
    for (std::size_t r : rows_) {
      const Row& row = source_.rows()[r];
      const ColumnLookup lookup = [&](std::string_view name) -> const CellValue* {
        const auto i = source_.column_index(name);
        return i ? &row[*i] : nullptr;
      };
      try {
        if (!cells_match(eval_expr(expr, lookup), expected(r))) return false;
      } catch (const TransformError&) {
        return false;
      }
    }
    return true;
  }

 private:
  const IR& source_;
  const IR& target_;
  std::size_t target_col_;
  std::vector<std::size_t> rows_;
};

std::optional<std::string> detect_separator(const std::string& target, const std::vector<std::string>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  if (target.size() < total || parts.size() < 2) return std::nullopt;
  const std::size_t gaps = parts.size() - 1;
  if ((target.size() - total) % gaps != 0) return std::nullopt;
  const std::size_t len = (target.size() - total) / gaps;
  if (target.compare(0, parts[0].size(), parts[0]) != 0) return std::nullopt;
  return target.substr(parts[0].size(), len);
}

double snap(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  double out = std::strtod(buf, nullptr);
  return out == 0.0 ? 0.0 : out;
}

const std::vector<std::string>& split_candidates() {
  static const std::vector<std::string> seps = {" ", ", ", ",", "-", "_", "/", "|", ";", ":", ".", "@"};
  return seps;
}

std::vector<std::string> split_all(const std::string& s, const std::string& sep) {
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

std::vector<Expr> source_cols(const Correspondence& c, const std::vector<std::size_t>& order) {
  std::vector<Expr> out;
  for (std::size_t i : order) out.push_back(Expr::col(c.sources[i]));
  return out;
}

std::optional<Expr> ladder(const Correspondence& corr, const Columns& cols, const ExampleSet& ex) {
  const std::size_t k = cols.sources.size();
  const std::size_t first = ex.rows().front();

  // identity
  for (const auto& s : corr.sources)
    if (ex.reproduces(Expr::col(s))) return Expr::col(s);

  // concat over source permutations
  if (k >= 2 && k <= 4) {
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    const std::string target_text = display_text(ex.expected(first));
    do {
      std::vector<std::string> parts;
      for (std::size_t i : order) parts.push_back(display_text(ex.input(first, cols.sources[i])));
      const auto sep = detect_separator(target_text, parts);
      if (!sep) continue;
      Expr candidate = Expr::concat(source_cols(corr, order), *sep);
      if (ex.reproduces(candidate)) return candidate;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  if (k != 1) return std::nullopt;

  const std::string& name = corr.sources.front();
  const std::size_t col = cols.sources.front();
  const CellValue& x0 = ex.input(first, col);
  const std::string x0_text = display_text(x0);
  const std::string y0_text = display_text(ex.expected(first));

  // split
  for (const auto& sep : split_candidates()) {
    const auto parts = split_all(x0_text, sep);
    if (parts.size() < 2) continue;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i] != y0_text) continue;
      for (int index : {static_cast<int>(i), static_cast<int>(i) - static_cast<int>(parts.size())}) {
        Expr candidate = Expr::split(Expr::col(name), sep, index);
        if (ex.reproduces(candidate)) return candidate;
      }
    }
  }

  // format
  for (const char* pattern : {"{:upper}", "{:lower}"}) {
    Expr candidate = Expr::format(Expr::col(name), pattern);
    if (ex.reproduces(candidate)) return candidate;
  }
  if (x0.numeric()) {
    for (int decimals = 0; decimals <= 4; ++decimals) {
      Expr candidate = Expr::format(Expr::col(name), "{:." + std::to_string(decimals) + "f}");
      if (ex.reproduces(candidate)) return candidate;
    }
  }

  // affine from two examples with distinct inputs
  {
    std::optional<std::pair<double, double>> p1, p2;
    bool numeric = true;
    for (std::size_t r : ex.rows()) {
      const auto x = ex.input(r, col).is_number() ? std::optional<double>(ex.input(r, col).as_number()) : std::nullopt;
      const auto y = ex.expected(r).is_number() ? std::optional<double>(ex.expected(r).as_number()) : std::nullopt;
      if (!x || !y) {
        numeric = false;
        break;
      }
      if (!p1) {
        p1 = {*x, *y};
      } else if (!p2 && *x != p1->first) {
        p2 = {*x, *y};
      }
    }
    if (numeric && p1 && p2) {
      const double a = snap((p2->second - p1->second) / (p2->first - p1->first));
      const double c = snap(p1->second - a * p1->first);
      if (a != 0.0) {
        Expr candidate = make_affine(name, a, c);
        if (ex.reproduces(candidate)) return candidate;
      }
    }
  }

  // map lookup from observed pairs
  {
    std::map<std::string, CellValue> table;
    bool functional = true;
    bool boolean_source = true;
    for (std::size_t r : ex.rows()) {
      const CellValue& x = ex.input(r, col);
      if (!x.is_bool()) boolean_source = false;
      const auto [it, inserted] = table.emplace(display_text(x), ex.expected(r));
      if (!inserted && !cells_match(it->second, ex.expected(r))) {
        functional = false;
        break;
      }
    }
    if (functional && (table.size() < ex.size() || boolean_source)) {
      Expr candidate = Expr::map_lookup(Expr::col(name), std::move(table), Expr::col(name));
      if (ex.reproduces(candidate)) return candidate;
    }
  }
  return std::nullopt;
}

// ---- shape-based ladder for correspondences without aligned rows

std::set<std::string> shapes_of(const IR& ir, std::size_t col, const std::vector<std::vector<bool>>* trusted) {
  std::set<std::string> out;
  for (std::size_t r = 0; r < ir.row_count(); ++r) {
    const CellValue& cell = ir.rows()[r][col];
    if (cell.is_missing() || (trusted && !(*trusted)[r][col])) continue;
    out.insert(value_shape(display_text(cell)));
  }
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::optional<Expr> shape_ladder(const Correspondence& corr, const Columns& cols, const AlignedSamples& s) {
  std::vector<std::string> targets;
  for (const auto& row : s.full_target.rows())
    if (!row[cols.target].is_missing()) targets.push_back(display_text(row[cols.target]));
  if (targets.empty()) return std::nullopt;
  const auto trusted = trust_mask(s.full_source, true);

  std::set<std::string> target_shapes;
  for (const auto& t : targets) target_shapes.insert(value_shape(t));

  std::vector<std::set<std::string>> source_shapes;
  for (std::size_t c : cols.sources) source_shapes.push_back(shapes_of(s.full_source, c, &trusted));

  for (std::size_t i = 0; i < corr.sources.size(); ++i)
    if (!source_shapes[i].empty() && subset(target_shapes, source_shapes[i])) return Expr::col(corr.sources[i]);

  const std::size_t k = corr.sources.size();
  if (k >= 2 && k <= 4) {
    for (const auto& sep : split_candidates()) {
      std::vector<std::vector<std::string>> split_targets;
      bool fits = true;
      for (const auto& t : targets) {
        auto parts = split_all(t, sep);
        if (parts.size() != k) {
          fits = false;
          break;
        }
        split_targets.push_back(std::move(parts));
      }
      if (!fits) continue;
      std::vector<std::size_t> order(k);
      for (std::size_t i = 0; i < k; ++i) order[i] = i;
      do {
        bool ok = true;
        for (const auto& parts : split_targets)
          for (std::size_t p = 0; p < k && ok; ++p)
            ok = source_shapes[order[p]].count(value_shape(parts[p])) > 0;
        if (ok) return Expr::concat(source_cols(corr, order), sep);
      } while (std::next_permutation(order.begin(), order.end()));
    }
    return std::nullopt;
  }

  if (k == 1) {
    const std::size_t col = cols.sources.front();
    const std::string& name = corr.sources.front();
    std::vector<std::string> patterns = {"{:upper}", "{:lower}"};
    for (int d = 0; d <= 4; ++d) patterns.push_back("{:." + std::to_string(d) + "f}");
    for (const auto& pattern : patterns) {
      Expr candidate = Expr::format(Expr::col(name), pattern);
      std::set<std::string> produced;
      for (std::size_t r = 0; r < s.full_source.row_count(); ++r) {
        const CellValue& cell = s.full_source.rows()[r][col];
        if (cell.is_missing() || !trusted[r][col]) continue;
        try {
          produced.insert(value_shape(display_text(eval_expr(candidate, std::map<std::string, CellValue>{{name, cell}}))));
        } catch (const TransformError&) {
          produced.clear();
          break;
        }
      }
      if (!produced.empty() && subset(target_shapes, produced)) return candidate;
    }
  }
  return std::nullopt;
}

TransformationProgram run_ladder(const AlignedSamples& s, const SchemaMap& map, Diagnostics* diagnostics) {
  if (s.full_target.empty()) throw TransformError("cannot infer a program from an empty target sample");
  TransformationProgram program;
  for (const auto& corr : map.correspondences) {
    if (corr.sources.empty()) throw ContractViolation("correspondence for '" + corr.target + "' has no sources");
    const auto cols = resolve(corr, s.source, s.target);
    if (!cols) throw ContractViolation("schema map references columns missing from the samples");

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < s.target.row_count(); ++r) {
      if (s.target.rows()[r][cols->target].is_missing()) continue;
      bool trusted = true;
      for (std::size_t c : cols->sources) trusted = trusted && s.trusted[r][c];
      if (trusted) rows.push_back(r);
    }

    std::optional<Expr> found;
    if (!rows.empty()) {
      found = ladder(corr, *cols, ExampleSet(s.source, s.target, cols->target, std::move(rows)));
    } else {
      found = shape_ladder(corr, *cols, s);
    }
    if (!found) {
      if (diagnostics)
        diagnostics->warn("no transformation reproduces the examples of '" + corr.target + "'; using identity");
      found = Expr::col(corr.sources.front());
    }
    program.entries.push_back({corr.target, std::move(*found)});
  }
  return program;
}

}  // namespace

std::string value_shape(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    char cls = static_cast<char>(c);
    if (std::isupper(c)) cls = 'A';
    else if (std::islower(c)) cls = 'a';
    else if (std::isdigit(c)) cls = '9';
    if (out.empty() || out.back() != cls || !(cls == 'A' || cls == 'a' || cls == '9')) out.push_back(cls);
  }
  return out;
}

Expr make_affine(const std::string& column, double a, double c) {
  Expr x = Expr::col(column);
  if (a != 1.0) x = Expr::arith(ArithOp::Mul, x, Expr::constant(CellValue::number(a)));
  if (c != 0.0) x = Expr::arith(ArithOp::Add, x, Expr::constant(CellValue::number(c)));
  return x;
}

AlignedSamples align_samples(const IR& source_sample, const IR& target_sample, const SchemaMap& map) {
  AlignedSamples out;
  out.full_source = source_sample;
  out.full_target = target_sample;
  const auto trusted = trust_mask(source_sample, true);
  const Texts src = display_texts(source_sample);
  const Texts tgt = display_texts(target_sample);

  std::vector<Columns> links;
  for (const auto& corr : map.correspondences)
    if (auto cols = resolve(corr, source_sample, target_sample)) links.push_back(std::move(*cols));

  // evidence is weighted by surprise: log2(rows / frequency of the value in its column)
  const std::size_t n = source_sample.row_count();
  std::vector<std::map<std::string, std::size_t>> freq(source_sample.column_count());
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t c = 0; c < source_sample.column_count(); ++c)
      if (trusted[s][c]) ++freq[c][src[s][c]];
  auto bits = [&](std::size_t c, const std::string& x) {
    return std::log2(static_cast<double>(n) / static_cast<double>(freq[c].at(x)));
  };
  const double required = std::log2(static_cast<double>(std::max<std::size_t>(n, 2))) + kAlignMarginBits;

  auto linked_key = [&](std::size_t s) {
    std::string key;
    for (const auto& link : links)
      for (std::size_t c : link.sources) key += src[s][c] + '\x1f';
    return key;
  };

  std::vector<Row> src_rows, tgt_rows;
  std::vector<std::vector<bool>> mask;
  std::vector<bool> used(n, false);
  std::vector<double> score(n);
  for (std::size_t t = 0; t < target_sample.row_count(); ++t) {
    std::optional<std::size_t> best;
    for (std::size_t s = 0; s < n; ++s) {
      score[s] = 0.0;
      if (used[s]) continue;
      for (const auto& link : links) {
        const std::string& y = tgt[t][link.target];
        if (target_sample.rows()[t][link.target].is_missing() || y.empty()) continue;
        for (std::size_t c : link.sources) {
          if (!trusted[s][c]) continue;
          const std::string& x = src[s][c];
          if (x == y) score[s] += bits(c, x);
          else if (x.size() >= 3 && y.find(x) != std::string::npos) score[s] += 0.5 * bits(c, x);
          else if (link.sources.size() == 1 && freq[c].count(y)) score[s] -= bits(c, y);
        }
      }
      if (!best || score[s] > score[*best]) best = s;
    }
    if (!best || score[*best] < required) continue;
    // the runner-up must be clearly weaker unless it is a copy of the winner
    const std::string winner = linked_key(*best);
    bool ambiguous = false;
    for (std::size_t s = 0; s < n && !ambiguous; ++s)
      if (s != *best && !used[s] && score[s] > score[*best] - kAlignMarginBits && linked_key(s) != winner)
        ambiguous = true;
    if (ambiguous) continue;
    used[*best] = true;
    src_rows.push_back(source_sample.rows()[*best]);
    mask.push_back(trusted[*best]);
    tgt_rows.push_back(target_sample.rows()[t]);
  }
  out.source = IR(source_sample.headers(), std::move(src_rows));
  out.target = IR(target_sample.headers(), std::move(tgt_rows));
  out.trusted = std::move(mask);
  return out;
}

TransformationProgram infer_program_fallback(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                             Diagnostics* diagnostics) {
  if (target_sample.empty()) throw TransformError("cannot infer a program from an empty target sample");
  if (source_sample.row_count() != target_sample.row_count())
    throw ContractViolation("positional inference needs samples of equal length");
  AlignedSamples s;
  s.source = source_sample;
  s.target = target_sample;
  s.trusted = trust_mask(source_sample, false);
  s.full_source = source_sample;
  s.full_target = target_sample;
  return run_ladder(s, map, diagnostics);
}

TransformationProgram infer_program_fallback(const AlignedSamples& samples, const SchemaMap& map,
                                             Diagnostics* diagnostics) {
  return run_ladder(samples, map, diagnostics);
}

TransformationProgram infer_program_local(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                          Diagnostics* diagnostics) {
  if (target_sample.empty()) throw TransformError("cannot infer a program from an empty target sample");
  return run_ladder(align_samples(source_sample, target_sample, map), map, diagnostics);
}

std::string verify_program(const TransformationProgram& program, const AlignedSamples& samples,
                           const SchemaMap& map) {
  for (const auto& corr : map.correspondences) {
    const ProgramEntry* entry = program.find(corr.target);
    if (!entry) return "no expression for '" + corr.target + "'";
    const auto t = samples.target.column_index(corr.target);
    if (!t) continue;
    std::set<std::string> used;
    entry->expr.collect_columns(used);
    std::vector<std::size_t> inputs;
    for (const auto& name : used)
      if (const auto i = samples.source.column_index(name)) inputs.push_back(*i);
    for (std::size_t r = 0; r < samples.target.row_count(); ++r) {
      const CellValue& expected = samples.target.rows()[r][*t];
      if (expected.is_missing()) continue;
      bool trusted = true;
      for (std::size_t c : inputs) trusted = trusted && samples.trusted[r][c];
      if (!trusted) continue;
      const Row& row = samples.source.rows()[r];
      const ColumnLookup lookup = [&](std::string_view name) -> const CellValue* {
        const auto i = samples.source.column_index(name);
        return i ? &row[*i] : nullptr;
      };
      try {
        const CellValue got = eval_expr(entry->expr, lookup);
        if (!cells_match(got, expected))
          return "'" + corr.target + "' produced '" + display_text(got) + "' where '" + display_text(expected) +
                 "' was expected";
      } catch (const TransformError& e) {
        return "'" + corr.target + "': " + e.what();
      }
    }
  }
  return {};
}

std::string_view infer_prompt_template() {
  return "You receive a schema map, sample rows of a source table and example rows of a target table. "
         "Write one expression per mapped target column that derives the target value from the source row.\n"
         "Rules:\n"
         "- Only reference source columns listed in the schema map.\n"
         "- Use only these operations: col, const, concat, arith (+ - * /), format, map, split.\n"
         "- Missing inputs produce missing outputs; do not special-case them.\n"
         "- Prefer the simplest expression that reproduces every example.\n"
         "- Do not invent values that cannot be derived from the source row.\n"
         "- Respond with JSON only: {\"program\": {\"version\": 1, \"columns\": [{\"target\": ..., \"expr\": ...}]}}.\n";
}

TransformationProgram infer_program_remote(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                           Provider& provider, Diagnostics& diagnostics) {
  if (target_sample.empty()) throw TransformError("cannot infer a program from an empty target sample");
  const AlignedSamples aligned = align_samples(source_sample, target_sample, map);

  // aligned rows first, then the rest of the sample up to the prompt budget
  std::vector<Row> rows;
  std::set<std::string> seen;
  auto add = [&](const Row& row) {
    if (rows.size() >= kMaxPromptRows) return;
    std::string key = row_key(source_sample, row);
    if (seen.insert(std::move(key)).second) rows.push_back(row);
  };
  for (const auto& row : aligned.source.rows()) add(row);
  for (const auto& row : source_sample.rows()) add(row);

  nlohmann::ordered_json request;
  request["prompt"] = std::string(infer_prompt_template());
  request["schema_map"] = schema_map_to_json(map);
  request["source_sample"] = ir_to_wire(IR(source_sample.headers(), std::move(rows)));
  request["target_sample"] = ir_to_wire(target_sample);

  auto fallback = [&](const std::string& reason) {
    diagnostics.warn("inference provider rejected (" + reason + "); using local inference");
    return infer_program_fallback(aligned, map, &diagnostics);
  };

  const ProviderResult result = provider.request("infer", request);
  if (!result.ok) return fallback(result.error);
  if (!result.body.is_object() || !result.body.contains("program")) return fallback("response has no program");

  TransformationProgram program;
  try {
    program = program_from_json(result.body["program"]);
  } catch (const ProgramParseError& e) {
    return fallback(std::string("unparsable program at '") + e.path() + "': " + e.what());
  }
  const auto violations = validate_program(program, source_sample.headers(), map);
  if (!violations.empty()) return fallback(violations.front());
  if (const auto mismatch = verify_program(program, aligned, map); !mismatch.empty()) return fallback(mismatch);
  return program;
}

}  // namespace flowetl
