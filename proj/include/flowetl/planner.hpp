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

#include "flowetl/dtn.hpp"
#include "flowetl/ir.hpp"
#include "flowetl/provider.hpp"
#include "flowetl/schema.hpp"
#include "flowetl/schema_match.hpp"
#include "flowetl/transform.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace flowetl {

inline constexpr int kPayloadVersion = 1;
/// Plan search stops at the first candidate scoring strictly above this.
inline constexpr double kEarlyStopDqs = 0.95;

/// A file observed by an observer: sampled rows for sources, every row for targets.
struct FileArtifacts {
  std::string name;
  ReconstructionKey key;
  IR contents;
};

nlohmann::ordered_json key_to_json(const ReconstructionKey& key);
ReconstructionKey key_from_json(const nlohmann::ordered_json& json);
nlohmann::ordered_json artifacts_to_json(const FileArtifacts& artifacts);
FileArtifacts artifacts_from_json(const nlohmann::ordered_json& json);

/// MVH(impute) -> DRH -> NOH(impute_median).
PlanSteps default_plan();

struct PlanPayload {
  std::string source_file;
  ReconstructionKey reconstruction_key;
  SchemaMap schema_map;
  PlanSteps plan_steps = default_plan();
  TransformationProgram logic;
  ColumnSchema ir_schema;
};

nlohmann::ordered_json payload_to_json(const PlanPayload& payload);
/// Throws ContractViolation on a missing field or an unknown payload_version.
PlanPayload payload_from_json(const nlohmann::ordered_json& json);

struct PlanCandidate {
  PlanSteps steps;
  std::optional<double> dqs;  // absent for failed candidates
  std::string failure;        // empty unless failed

  bool failed() const noexcept { return !dqs.has_value(); }
};

/// 3 MVH strategies x 2 NOH strategies, each under the 6 orderings of the
/// three node kinds in lexicographic order of (MVH, DRH, NOH). The first
/// plan is default_plan().
std::vector<PlanSteps> enumerate_plans();

struct PlanSearch {
  PlanCandidate best;
  std::vector<PlanCandidate> candidates;  // evaluated candidates, in order
  bool early_stopped = false;
  bool used_default = false;  // every candidate failed
};

/// Runs each plan on the sample and scores the result. Node errors and
/// results without rows mark a candidate failed. With `early_stop` the first
/// candidate above kEarlyStopDqs wins; otherwise the highest DQS wins, ties
/// going to the earlier plan. Throws ContractViolation on an empty sample.
PlanSearch evaluate_plans(const IR& sample, const ColumnSchema& schema, bool early_stop = true);

enum class ProviderMode { Algorithmic, Remote };

struct PlannerConfig {
  ProviderMode mode = ProviderMode::Algorithmic;
  Provider* provider = nullptr;  // required for Remote
  MatchThresholds thresholds;
  bool early_stop = true;
};

struct PlanResult {
  PlanPayload payload;
  nlohmann::ordered_json metrics;  // deterministic part
  nlohmann::ordered_json timings;  // milliseconds per phase
};

/// Infers both schemas, matches them, searches plans on the source sample,
/// infers the transformation program on the cleaned sample and assembles
/// the payload. Source columns dropped by the chosen plan leave the map.
/// Throws PlanningError when either artifact is empty or the schema map is
/// invalid.
PlanResult build_plan(const FileArtifacts& source, const FileArtifacts& target, const PlannerConfig& config,
                      Diagnostics& diagnostics);

}  // namespace flowetl
