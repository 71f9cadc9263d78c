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
#include "flowetl/planner.hpp"
#include "flowetl/provider.hpp"
#include "flowetl/runtime.hpp"
#include "flowetl/schema_match.hpp"
#include "flowetl/transform.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace flowetl {

// ---------------------------------------------------------------- polluter

struct PollutionSpec {
  double missing = 0.40;
  double duplicates = 0.20;
  double outliers = 0.075;
  std::uint64_t seed = 0;
  /// Share of a number column's cells that may be blanked while other
  /// columns can still absorb the missing budget.
  double numeric_missing_share = 0.10;
};

/// Seeded corruption. Outliers are placed first: number-column cells pushed
/// 3 to 6 times the MAD half-width away from the median, alternating sides.
/// Blanks go next, never on outlier cells, preferring non-number columns.
/// Finally copies of existing rows are appended, chosen so the missing and
/// outlier shares stay on target. Throws ContractViolation on an empty IR
/// or targets outside [0, 1).
IR pollute(const IR& ir, const PollutionSpec& spec, Diagnostics* diagnostics = nullptr);

// ---------------------------------------------------------------- PlanEval

/// An operation of a plan. Identity is (kind, type, targets); params decide
/// whether a present operation is correct.
struct PlanOp {
  std::string kind;  // match | transform
  std::string type;  // map for match ops, expr_kind for transform ops
  std::vector<std::string> targets;
  nlohmann::ordered_json params;
};

struct GroundTruthPlan {
  std::vector<PlanOp> ops;
};

struct PlanEvalScore {
  double s = 0.0;
  double max_s = 0.0;
  double value = 0.0;
  std::size_t correct = 0;
  std::size_t partial = 0;
  std::size_t hallucinated = 0;
};

/// JSON equality where numbers compare within 1e-9 relative tolerance.
bool params_equal(const nlohmann::ordered_json& a, const nlohmann::ordered_json& b);

/// +1 for an op whose identity is in the ground truth with equal params,
/// +0.5 for a matching identity with different params, 0 otherwise; each
/// ground-truth op is credited once. value = s / n. Throws ContractViolation
/// on an empty ground truth.
PlanEvalScore plan_eval(const std::vector<PlanOp>& plan, const GroundTruthPlan& gt);

/// One match op per correspondence (params: sorted sources) and one
/// transform op per non-identity expression (params: the expression JSON).
std::vector<PlanOp> plan_ops(const SchemaMap& map, const TransformationProgram& program);
std::vector<PlanOp> plan_ops(const PlanPayload& payload);

nlohmann::ordered_json op_to_json(const PlanOp& op);
PlanOp op_from_json(const nlohmann::ordered_json& json);
nlohmann::ordered_json gt_to_json(const GroundTruthPlan& gt);
GroundTruthPlan gt_from_json(const nlohmann::ordered_json& json);

// ---------------------------------------------------------------- corpus

struct CorpusSpec {
  std::uint64_t seed = 7;
  /// Row counts cycle through the built-in domains; empty uses the defaults
  /// (30 to 50,000 rows).
  std::vector<std::size_t> sizes;
  std::size_t target_rows = 6;
  PollutionSpec pollution;
};

struct CorpusPair {
  std::string name;
  FileFormat format = FileFormat::Csv;
  ReconstructionKey key;
  IR clean;
  IR polluted;
  IR target;  // the ground-truth program applied to a few clean rows
  std::vector<std::size_t> target_source_rows;
  SchemaMap map;
  TransformationProgram program;
  GroundTruthPlan gt;
};

/// Twelve domains (five of them JSON) covering renames, merges, affine and
/// format transformations.
std::vector<CorpusPair> generate_corpus(const CorpusSpec& spec = {});

/// <dir>/<name>/{source,clean,target}.<csv|json> and gt.json.
void write_corpus(const std::vector<CorpusPair>& corpus, const std::string& dir);

// ---------------------------------------------------------------- benchmark

struct BenchmarkConfig {
  std::uint64_t seed = 0;
  SamplingConfig sampling;
  ProviderMode mode = ProviderMode::Algorithmic;
  std::size_t workers = 1;
};

struct BenchmarkRow {
  std::string dataset;
  std::size_t entries = 0;
  bool ok = false;
  std::string error;
  double time_s = 0.0;
  double pre_dqs = 0.0;
  double dqs = 0.0;
  double missing_pct = 0.0;
  double duplicate_pct = 0.0;
  double outlier_pct = 0.0;
  double plan_eval = 0.0;
  std::string plan;
};

/// Runs the pipeline on every pair directory under `corpus_dir` (sorted by
/// name) into <out_dir>/runs/<name>, then writes results.csv and results.md.
std::vector<BenchmarkRow> benchmark(const std::string& corpus_dir, const std::string& out_dir,
                                    const BenchmarkConfig& config = {});

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
std::string benchmark_markdown(const std::vector<BenchmarkRow>& rows);

}  // namespace flowetl
