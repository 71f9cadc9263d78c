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

#include "flowetl/bus.hpp"
#include "flowetl/ir.hpp"
#include "flowetl/planner.hpp"
#include "flowetl/provider.hpp"
#include "flowetl/quality.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowetl {

inline constexpr int kReportVersion = 1;

inline constexpr std::string_view kSourceObserver = "source-observer";
inline constexpr std::string_view kTargetObserver = "target-observer";
inline constexpr std::string_view kPlanner = "planner";
inline constexpr std::string_view kWorker = "worker";

struct SamplingConfig {
  double pct = 0.05;
  std::size_t floor = 50;
};

/// min(rows, max(ceil(rows * pct), floor)).
std::size_t sample_size(std::size_t rows, const SamplingConfig& config = {});

/// `count` distinct indices below `rows`, drawn uniformly with a seeded
/// generator that does not depend on the standard library's distributions,
/// returned in ascending order.
std::vector<std::size_t> sample_indices(std::size_t rows, std::size_t count, std::uint64_t seed);

IR sample_rows(const IR& ir, const SamplingConfig& config, std::uint64_t seed);

/// {"filename", "objectsCount", "filesizeMBs"} for a translated file.
nlohmann::ordered_json file_contents_metrics(const std::string& filename, std::size_t objects, std::size_t bytes);

nlohmann::ordered_json indicators_to_json(const QualityIndicators& q);

/// Loads and samples the source, publishing FileArtifacts to
/// source-artifacts and a metrics message. Failures publish an error
/// metrics message only. Returns whether artifacts were published.
bool observe_source(Bus& bus, const std::string& path, std::uint64_t seed, const SamplingConfig& sampling = {});

/// Same for the target, without sampling.
bool observe_target(Bus& bus, const std::string& path);

struct WorkerOptions {
  std::size_t workers = 1;  // row shards transformed in parallel
};

struct WorkerResult {
  IR output;
  std::string output_path;
  QualityIndicators pre;
  QualityIndicators post;
  nlohmann::ordered_json metrics;  // deterministic part
  nlohmann::ordered_json timings;
};

/// Full source -> pre-DQS -> plan steps -> transformation program (sharded
/// over rows, merged in shard order) -> duplicate removal on the projected
/// rows -> post-DQS -> output written to <out_dir>/output/<source file name>. Throws ContractViolation when the plan
/// names a different file; node and transform errors propagate.
WorkerResult run_worker(const PlanPayload& plan, const std::string& source_path, const std::string& out_dir,
                        const WorkerOptions& options = {});

struct RunReport {
  nlohmann::ordered_json json;
  std::string text;
};

/// Consumes the metrics topic from `cursor` to its head. Components are
/// grouped by their "from" field; timings live under a separate "timings"
/// key so the rest of the report is reproducible.
RunReport compile_report(Bus& bus, ConsumerCursor& cursor);
RunReport compile_report(const std::vector<Message>& messages);

/// Rebuilds the report of a finished run from <run_dir>/bus/metrics.ndjson.
RunReport load_report(const std::string& run_dir);

/// Human-readable rendering of a report document.
std::string render_report(const nlohmann::ordered_json& report);

struct PipelineConfig {
  std::string source;
  std::string target;
  std::string out_dir;
  std::uint64_t seed = 0;
  SamplingConfig sampling;
  ProviderMode mode = ProviderMode::Algorithmic;
  ProviderConfig provider = ProviderConfig::from_env();
  MatchThresholds thresholds;
  std::size_t workers = 1;
  std::chrono::milliseconds stage_timeout{600000};
};

/// Reads a JSON config file whose keys mirror the CLI flags (source,
/// target, out, seed, sample_floor, sample_pct, provider, workers,
/// provider_url, provider_key, provider_timeout_ms). Unknown keys throw.
void apply_config_file(PipelineConfig& config, const std::string& path);

struct PipelineResult {
  int exit_code = 0;
  RunReport report;
  std::string output_path;
  std::vector<ProviderCall> provider_calls;
};

/// Runs observers, planner and worker as concurrent tasks that talk only
/// through the bus, then writes the output file, report.json, report.txt,
/// plan.json and bus/<topic>.ndjson into out_dir. Any component failure
/// gives a nonzero exit code; the partial report is still written.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Same, against an explicit provider (used with remote mode).
PipelineResult run_pipeline(const PipelineConfig& config, Provider* provider);

}  // namespace flowetl
