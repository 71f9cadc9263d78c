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

#include "flowetl/planner.hpp"

#include "flowetl/errors.hpp"
#include "flowetl/inference.hpp"
#include "flowetl/quality.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <set>

namespace flowetl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Drops source columns missing from `columns`; targets left without a
/// source become unmapped.
SchemaMap prune_map(const SchemaMap& map, const std::vector<std::string>& columns, Diagnostics& diagnostics) {
  const std::set<std::string> available(columns.begin(), columns.end());
  SchemaMap out;
  std::set<std::string> dropped;
  for (const auto& c : map.correspondences) {
    Correspondence kept{{}, c.target};
    for (const auto& s : c.sources) {
      if (available.count(s)) kept.sources.push_back(s);
      else dropped.insert(s);
    }
    if (kept.sources.empty()) {
      out.unmapped_targets.push_back(c.target);
      diagnostics.warn("target '" + c.target + "' lost its sources to the cleaning plan");
    } else {
      out.correspondences.push_back(std::move(kept));
    }
  }
  for (const auto& s : map.unmapped_sources)
    if (available.count(s)) out.unmapped_sources.push_back(s);
  for (const auto& t : map.unmapped_targets) out.unmapped_targets.push_back(t);
  return out;
}

}  // namespace

nlohmann::ordered_json key_to_json(const ReconstructionKey& key) { return key.path; }

ReconstructionKey key_from_json(const nlohmann::ordered_json& json) {
  if (json.is_null()) return {};
  if (!json.is_array()) throw ContractViolation("reconstruction key must be an array of strings");
  ReconstructionKey key;
  for (const auto& part : json) {
    if (!part.is_string()) throw ContractViolation("reconstruction key must be an array of strings");
    key.path.push_back(part.get<std::string>());
  }
  return key;
}

nlohmann::ordered_json artifacts_to_json(const FileArtifacts& artifacts) {
  return {{"name", artifacts.name},
          {"reconstructionKey", key_to_json(artifacts.key)},
          {"contents", ir_to_wire(artifacts.contents)}};
}

FileArtifacts artifacts_from_json(const nlohmann::ordered_json& json) {
  try {
    return {json.at("name").get<std::string>(), key_from_json(json.at("reconstructionKey")),
            ir_from_wire(json.at("contents"))};
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("malformed file artifacts: ") + e.what());
  }
}

nlohmann::ordered_json payload_to_json(const PlanPayload& payload) {
  nlohmann::ordered_json out;
  out["payload_version"] = kPayloadVersion;
  out["source_file"] = payload.source_file;
  out["reconstruction_key"] = key_to_json(payload.reconstruction_key);
  out["schema_map"] = schema_map_to_json(payload.schema_map);
  out["plan_steps"] = steps_to_json(payload.plan_steps);
  out["logic"] = program_to_json(payload.logic);
  out["ir_schema"] = schema_to_json(payload.ir_schema);
  return out;
}

PlanPayload payload_from_json(const nlohmann::ordered_json& json) {
  static const std::array<const char*, 7> fields = {"payload_version", "source_file", "reconstruction_key",
                                                    "schema_map",      "plan_steps",  "logic",
                                                    "ir_schema"};
  if (!json.is_object()) throw ContractViolation("plan payload must be an object");
  for (const char* f : fields)
    if (!json.contains(f)) throw ContractViolation(std::string("plan payload lacks '") + f + "'");
  if (json["payload_version"] != kPayloadVersion)
    throw ContractViolation("unsupported payload_version " + json["payload_version"].dump());
  if (!json["source_file"].is_string()) throw ContractViolation("source_file must be a string");
  return {json["source_file"].get<std::string>(),
          key_from_json(json["reconstruction_key"]),
          schema_map_from_json(json["schema_map"]),
          steps_from_json(json["plan_steps"]),
          program_from_json(json["logic"]),
          schema_from_json(json["ir_schema"])};
}

std::vector<PlanSteps> enumerate_plans() {
  std::vector<PlanSteps> plans;
  for (Strategy mvh : {Strategy::Impute, Strategy::DropRows, Strategy::DropColumns}) {
    for (Strategy noh : {Strategy::ImputeMedian, Strategy::DropRow}) {
      std::array<NodeSpec, 3> nodes = {NodeSpec::mvh(mvh), NodeSpec::drh(), NodeSpec::noh(noh)};
      std::array<int, 3> order = {0, 1, 2};
      do {
        plans.emplace_back(std::vector<NodeSpec>{nodes[order[0]], nodes[order[1]], nodes[order[2]]});
      } while (std::next_permutation(order.begin(), order.end()));
    }
  }
  return plans;
}

PlanSteps default_plan() {
  return PlanSteps({NodeSpec::mvh(Strategy::Impute), NodeSpec::drh(), NodeSpec::noh(Strategy::ImputeMedian)});
}

PlanSearch evaluate_plans(const IR& sample, const ColumnSchema& schema, bool early_stop) {
  if (sample.empty()) throw ContractViolation("plan search needs a non-empty sample");
  PlanSearch search{{default_plan(), std::nullopt, "no candidate evaluated"}, {}, false, false};
  std::optional<std::size_t> best;
  for (const auto& steps : enumerate_plans()) {
    PlanCandidate candidate{steps, std::nullopt, {}};
    try {
      const IR cleaned = apply_steps(sample, schema, steps);
      if (cleaned.empty()) {
        candidate.failure = "degenerate result: no rows left";
      } else {
        candidate.dqs = dqs(cleaned, schema_for(cleaned, schema)).dqs;
      }
    } catch (const NodeError& e) {
      candidate.failure = e.what();
    }
    search.candidates.push_back(candidate);
    if (candidate.failed()) continue;
    if (!best || *candidate.dqs > *search.candidates[*best].dqs) best = search.candidates.size() - 1;
    if (early_stop && *candidate.dqs > kEarlyStopDqs) {
      search.early_stopped = true;
      break;
    }
  }
  if (best) {
    search.best = search.candidates[*best];
  } else {
    search.used_default = true;
    search.best = {default_plan(), std::nullopt, "every candidate failed"};
  }
  return search;
}

PlanResult build_plan(const FileArtifacts& source, const FileArtifacts& target, const PlannerConfig& config,
                      Diagnostics& diagnostics) {
  if (source.contents.column_count() == 0 || source.contents.empty())
    throw PlanningError("source artifacts '" + source.name + "' hold no rows");
  if (target.contents.column_count() == 0 || target.contents.empty())
    throw PlanningError("target artifacts '" + target.name + "' hold no rows");
  if (config.mode == ProviderMode::Remote && !config.provider)
    throw PlanningError("remote mode needs a provider");

  PlanResult result;
  auto t = Clock::now();
  const ColumnSchema source_schema = infer_schema(source.contents);
  const ColumnSchema target_schema = infer_schema(target.contents);
  result.timings["schema_inference"] = ms_since(t);

  t = Clock::now();
  SchemaMap map = config.mode == ProviderMode::Remote
                      ? match_via_provider(source_schema, target_schema, *config.provider, diagnostics,
                                           config.thresholds)
                      : match_algorithmic(build_bipartite(source_schema, target_schema), config.thresholds);
  complete_unmapped(map, source_schema, target_schema);
  if (const auto violations = validate_schema_map(map, source_schema, target_schema); !violations.empty())
    throw PlanningError("invalid schema map: " + violations.front());
  result.timings["schema_matching"] = ms_since(t);

  t = Clock::now();
  const double sample_dqs = dqs(source.contents, source_schema).dqs;
  const PlanSearch search = evaluate_plans(source.contents, source_schema, config.early_stop);
  result.timings["plan_search"] = ms_since(t);

  t = Clock::now();
  IR cleaned = source.contents;
  try {
    cleaned = apply_steps(source.contents, source_schema, search.best.steps);
  } catch (const NodeError& e) {
    diagnostics.warn(std::string("chosen plan failed on the sample (") + e.what() + "); inferring from raw sample");
  }
  const SchemaMap pruned = prune_map(map, cleaned.headers(), diagnostics);
  TransformationProgram logic;
  if (pruned.correspondences.empty()) {
    diagnostics.warn("no mapped target columns; the program is empty");
  } else if (config.mode == ProviderMode::Remote) {
    logic = infer_program_remote(cleaned, target.contents, pruned, *config.provider, diagnostics);
  } else {
    logic = infer_program_local(cleaned, target.contents, pruned, &diagnostics);
  }
  result.timings["transform_inference"] = ms_since(t);

  result.payload = {source.name, source.key, pruned, search.best.steps, logic, source_schema};

  nlohmann::ordered_json trajectory = nlohmann::ordered_json::array();
  std::size_t failed = 0;
  for (const auto& c : search.candidates) {
    nlohmann::ordered_json entry{{"plan", c.steps.label()}};
    entry["dqs"] = c.dqs ? nlohmann::ordered_json(*c.dqs) : nlohmann::ordered_json(nullptr);
    if (c.failed()) {
      entry["failure"] = c.failure;
      ++failed;
    }
    trajectory.push_back(std::move(entry));
  }
  auto& m = result.metrics;
  m["sample_rows"] = source.contents.row_count();
  m["target_rows"] = target.contents.row_count();
  m["sample_dqs"] = sample_dqs;
  m["chosen_plan"] = search.best.steps.label();
  m["best_dqs"] = search.best.dqs ? nlohmann::ordered_json(*search.best.dqs) : nlohmann::ordered_json(nullptr);
  m["early_stopped"] = search.early_stopped;
  m["used_default"] = search.used_default;
  m["candidates_evaluated"] = search.candidates.size();
  m["failed_candidates"] = failed;
  m["dqs_trajectory"] = std::move(trajectory);
  m["mapped_targets"] = pruned.correspondences.size();
  return result;
}

}  // namespace flowetl
