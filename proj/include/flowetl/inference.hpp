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
#include "flowetl/provider.hpp"
#include "flowetl/schema_match.hpp"
#include "flowetl/transform.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace flowetl {

/// Upper bound on source rows sent in one inference request.
inline constexpr std::size_t kMaxPromptRows = 50;
/// Alignment evidence must beat log2(sample rows) by this many bits, and the
/// runner-up must trail the winner by as much.
inline constexpr double kAlignMarginBits = 4.0;

/// Source and target sample rows paired by value evidence: row i of
/// `source` is the partner of row i of `target`.
struct AlignedSamples {
  IR source;
  IR target;
  /// trusted[r][c] is false for cells of `source` that are Missing or carry
  /// an imputation value (the "unknown" placeholder, or a number column's
  /// median), which never count as evidence.
  std::vector<std::vector<bool>> trusted;
  IR full_source;
  IR full_target;
};

/// Pairs each target row with the source row sharing the most surprising
/// mapped values. An exact text match scores log2(n / f), f being the
/// value's frequency in its source column; target text containing the
/// source text scores half that. Target rows without a clear winner are
/// left out.
AlignedSamples align_samples(const IR& source_sample, const IR& target_sample, const SchemaMap& map);

/// Character-class signature: A upper, a lower, 9 digit, other characters
/// kept; runs collapse.
std::string value_shape(std::string_view text);

/// y = a*x + c over `column`, written without unit factors or zero offsets.
Expr make_affine(const std::string& column, double a, double c);

/// Deterministic inference over positionally paired samples. Per
/// correspondence the first hypothesis reproducing every example wins:
/// identity, concat, split, format (upper/lower/fixed decimals), affine,
/// map lookup. Otherwise identity with a warning. Throws TransformError on
/// an empty target sample and ContractViolation when the row counts differ.
TransformationProgram infer_program_fallback(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                             Diagnostics* diagnostics = nullptr);

/// Same ladder over aligned rows. Correspondences without aligned evidence
/// are inferred from value shapes of the full samples.
TransformationProgram infer_program_fallback(const AlignedSamples& samples, const SchemaMap& map,
                                             Diagnostics* diagnostics = nullptr);

/// align_samples followed by the fallback ladder.
TransformationProgram infer_program_local(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                          Diagnostics* diagnostics = nullptr);

/// Empty when every aligned example with trusted inputs is reproduced,
/// otherwise a description of the first mismatch.
std::string verify_program(const TransformationProgram& program, const AlignedSamples& samples,
                           const SchemaMap& map);

/// Instructions sent with every inference request.
std::string_view infer_prompt_template();

/// One "infer" request carrying the schema map, at most kMaxPromptRows
/// source rows (aligned rows first) and the target sample. The answer must
/// be {"program": <DSL>}; it is parsed, validated and verified on the
/// aligned rows. Any failure falls back to infer_program_local with a warning.
TransformationProgram infer_program_remote(const IR& source_sample, const IR& target_sample, const SchemaMap& map,
                                           Provider& provider, Diagnostics& diagnostics);

}  // namespace flowetl
