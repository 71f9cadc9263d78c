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

#include "flowetl/provider.hpp"
#include "flowetl/schema.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace flowetl {

struct ColumnRef {
  std::string name;
  ColumnType type = ColumnType::String;
};

/// Complete weighted bipartite graph between source columns and target
/// columns. Weights are row-major: weight(i, j) links sources[i] to targets[j].
struct BipartiteGraph {
  std::vector<ColumnRef> sources;
  std::vector<ColumnRef> targets;
  std::vector<double> weights;

  double weight(std::size_t source, std::size_t target) const { return weights[source * targets.size() + target]; }
  std::size_t edge_count() const noexcept { return weights.size(); }
};

/// One target column fed by one or more source columns.
struct Correspondence {
  std::vector<std::string> sources;
  std::string target;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Correspondences are listed in target-schema order. A source may feed
/// several targets (1:n); a target is fed by exactly one correspondence.
struct SchemaMap {
  std::vector<Correspondence> correspondences;
  std::vector<std::string> unmapped_sources;
  std::vector<std::string> unmapped_targets;

  const Correspondence* find_target(std::string_view target) const;
  friend bool operator==(const SchemaMap&, const SchemaMap&) = default;
};

nlohmann::ordered_json schema_map_to_json(const SchemaMap& map);
/// Throws ContractViolation on a malformed document. Unmapped lists are optional.
SchemaMap schema_map_from_json(const nlohmann::ordered_json& json);

struct MatchThresholds {
  double attach = 0.4;  // stage-2 n:1 / 1:n attachment
  double floor = 0.25;  // edges below this are never matched
};

/// Lowercased name tokens after camelCase / snake_case / space splitting and
/// synonym expansion.
std::vector<std::string> name_tokens(std::string_view name);

double syntactic_similarity(std::string_view a, std::string_view b);
double semantic_similarity(std::string_view a, std::string_view b);
/// complex is incompatible with number and boolean; everything else mixes.
bool types_compatible(ColumnType a, ColumnType b);

/// Mean of syntactic (1 - edit distance / longer length, lowercased) and
/// semantic (token-set Jaccard) similarity, halved for incompatible types.
double similarity(const ColumnRef& x, const ColumnRef& y);

/// Throws ContractViolation when either schema is empty.
BipartiteGraph build_bipartite(const ColumnSchema& source, const ColumnSchema& target);

/// Stage 1: source-proposing stable 1:1 matching over edges >= floor,
/// preferences by weight then column name. Stage 2: unmatched sources
/// attach to their best target, then unmatched targets claim their best
/// source, each when the edge reaches `attach`.
SchemaMap match_algorithmic(const BipartiteGraph& graph, const MatchThresholds& thresholds = {});

/// Stage-1 assignment only (target index per source, -1 when unmatched).
std::vector<int> stable_assignment(const BipartiteGraph& graph, double floor);

/// Empty when the map is consistent with both schemas.
std::vector<std::string> validate_schema_map(const SchemaMap& map, const ColumnSchema& source,
                                             const ColumnSchema& target);

/// Rules sent with every provider match request.
std::vector<std::string> default_match_rules();

/// Asks the provider for a map; any transport, parse or validation failure
/// falls back to match_algorithmic with a warning.
SchemaMap match_via_provider(const ColumnSchema& source, const ColumnSchema& target, Provider& provider,
                             Diagnostics& diagnostics, const MatchThresholds& thresholds = {});

/// Fills the unmapped lists from the correspondences.
void complete_unmapped(SchemaMap& map, const ColumnSchema& source, const ColumnSchema& target);

}  // namespace flowetl
