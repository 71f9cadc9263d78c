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

#include "flowetl/runtime.hpp"

#include "flowetl/errors.hpp"
#include "flowetl/schema.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace flowetl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = gen();
    if (x >= threshold) return x % n;
  }
}

std::string file_name(const std::string& path) { return fs::path(path).filename().string(); }

void publish_metrics(Bus& bus, std::string_view from, const std::string& status, ojson contents,
                     const std::string& error = {}, ojson timings = ojson::object()) {
  ojson msg;
  msg["from"] = from;
  msg["status"] = status;
  msg["contents"] = std::move(contents);
  if (!error.empty()) msg["error"] = error;
  msg["timings"] = std::move(timings);
  bus.publish(kMetricsTopic, msg.dump());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

/// Watches the metrics topic for failures of upstream components.
class UpstreamWatch {
 public:
  UpstreamWatch(Bus& bus, std::set<std::string> upstream)
      : bus_(bus), cursor_(bus.subscribe(kMetricsTopic)), upstream_(std::move(upstream)) {}

  bool failed() {
    while (auto msg = bus_.consume(cursor_)) {
      const auto j = ojson::parse(msg->payload, nullptr, false);
      if (j.is_discarded()) continue;
      if (upstream_.count(j.value("from", "")) && j.value("status", "") != "ok") failed_ = true;
    }
    return failed_;
  }

 private:
  Bus& bus_;
  ConsumerCursor cursor_;
  std::set<std::string> upstream_;
  bool failed_ = false;
};

constexpr std::chrono::milliseconds kPoll{5};

void planner_task(Bus& bus, const PipelineConfig& config, Provider* provider) {
  UpstreamWatch watch(bus, {std::string(kSourceObserver), std::string(kTargetObserver)});
  ConsumerCursor src_cur = bus.subscribe(kSourceArtifactsTopic);
  ConsumerCursor tgt_cur = bus.subscribe(kTargetArtifactsTopic);
  std::optional<Message> src, tgt;
  const auto deadline = Clock::now() + config.stage_timeout;
  while (!src || !tgt) {
    if (!src) src = bus.wait_consume(src_cur, kPoll);
    if (!tgt) tgt = bus.wait_consume(tgt_cur, kPoll);
    if (src && tgt) break;
    if (watch.failed()) return;  // observers already reported
    if (Clock::now() > deadline) {
      publish_metrics(bus, kPlanner, "error", ojson::object(), "timed out waiting for artifacts");
      return;
    }
  }

  const auto start = Clock::now();
  Diagnostics diagnostics;
  try {
    const FileArtifacts source = artifacts_from_json(ojson::parse(src->payload));
    const FileArtifacts target = artifacts_from_json(ojson::parse(tgt->payload));
    PlannerConfig pc;
    pc.mode = config.mode;
    pc.provider = provider;
    pc.thresholds = config.thresholds;
    PlanResult result = build_plan(source, target, pc, diagnostics);
    bus.publish(kPlansTopic, payload_to_json(result.payload).dump());

    ojson contents = result.metrics;
    contents["source_file"] = source.name;
    contents["target_file"] = target.name;
    contents["plan_steps"] = steps_to_json(result.payload.plan_steps);
    contents["schema_map"] = schema_map_to_json(result.payload.schema_map);
    contents["logic"] = program_to_json(result.payload.logic);
    ojson calls = ojson::array();
    ojson call_times = ojson::array();
    if (provider) {
      for (const auto& c : provider->calls()) {
        ojson entry{{"endpoint", c.endpoint}, {"ok", c.ok}};
        if (!c.error.empty()) entry["error"] = c.error;
        calls.push_back(std::move(entry));
        call_times.push_back(c.elapsed_ms);
      }
    }
    contents["provider_calls"] = std::move(calls);
    contents["warnings"] = diagnostics.warnings();
    ojson timings = result.timings;
    timings["provider_calls"] = std::move(call_times);
    timings["total"] = ms_since(start);
    publish_metrics(bus, kPlanner, "ok", std::move(contents), {}, std::move(timings));
  } catch (const std::exception& e) {
    ojson contents;
    contents["warnings"] = diagnostics.warnings();
    publish_metrics(bus, kPlanner, "error", std::move(contents), e.what(), ojson{{"total", ms_since(start)}});
  }
}

void worker_task(Bus& bus, const PipelineConfig& config, const fs::path& out_dir, std::optional<PlanPayload>& plan_out,
                 std::optional<WorkerResult>& result_out) {
  UpstreamWatch watch(bus, {std::string(kSourceObserver), std::string(kTargetObserver), std::string(kPlanner)});
  ConsumerCursor cur = bus.subscribe(kPlansTopic);
  std::optional<Message> msg;
  const auto deadline = Clock::now() + 2 * config.stage_timeout;
  while (!msg) {
    msg = bus.wait_consume(cur, kPoll);
    if (msg) break;
    if (watch.failed()) return;
    if (Clock::now() > deadline) {
      publish_metrics(bus, kWorker, "error", ojson::object(), "timed out waiting for a plan");
      return;
    }
  }
  try {
    plan_out = payload_from_json(ojson::parse(msg->payload));
    WorkerResult result = run_worker(*plan_out, config.source, out_dir.string(), {config.workers});
    publish_metrics(bus, kWorker, "ok", result.metrics, {}, result.timings);
    result_out = std::move(result);
  } catch (const std::exception& e) {
    publish_metrics(bus, kWorker, "error", ojson{{"filename", file_name(config.source)}}, e.what());
  }
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::size_t sample_size(std::size_t rows, const SamplingConfig& config) {
  const double scaled = std::ceil(static_cast<double>(rows) * config.pct - 1e-9);
  const auto wanted = std::max(static_cast<std::size_t>(std::max(scaled, 0.0)), config.floor);
  return std::min(rows, wanted);
}

std::vector<std::size_t> sample_indices(std::size_t rows, std::size_t count, std::uint64_t seed) {
  count = std::min(count, rows);
  std::vector<std::size_t> idx(rows);
  for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(gen, rows - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

IR sample_rows(const IR& ir, const SamplingConfig& config, std::uint64_t seed) {
  std::vector<Row> rows;
  for (std::size_t i : sample_indices(ir.row_count(), sample_size(ir.row_count(), config), seed))
    rows.push_back(ir.rows()[i]);
  return IR(ir.headers(), std::move(rows));
}

ojson file_contents_metrics(const std::string& filename, std::size_t objects, std::size_t bytes) {
  return {{"filename", filename},
          {"objectsCount", objects},
          {"filesizeMBs", static_cast<double>(bytes) / (1024.0 * 1024.0)}};
}

ojson indicators_to_json(const QualityIndicators& q) {
  return {{"dqs", q.dqs},
          {"missing_ratio", q.missing_ratio},
          {"outlier_ratio", q.outlier_ratio},
          {"duplicate_ratio", q.duplicate_ratio},
          {"cell_count", q.cell_count},
          {"row_count", q.row_count}};
}

bool observe_source(Bus& bus, const std::string& path, std::uint64_t seed, const SamplingConfig& sampling) {
  const auto start = Clock::now();
  const std::string name = file_name(path);
  try {
    const LoadedFile file = load_file(path);
    IR sample = sample_rows(file.ir, sampling, seed);
    ojson contents = file_contents_metrics(name, file.ir.row_count(), file.size_bytes);
    contents["sampleRows"] = sample.row_count();
    contents["seed"] = seed;
    bus.publish(kSourceArtifactsTopic, artifacts_to_json({name, file.key, std::move(sample)}).dump());
    publish_metrics(bus, kSourceObserver, "ok", std::move(contents), {}, ojson{{"total", ms_since(start)}});
    return true;
  } catch (const std::exception& e) {
    publish_metrics(bus, kSourceObserver, "error", ojson{{"filename", name}}, e.what(),
                    ojson{{"total", ms_since(start)}});
    return false;
  }
}

bool observe_target(Bus& bus, const std::string& path) {
  const auto start = Clock::now();
  const std::string name = file_name(path);
  try {
    LoadedFile file = load_file(path);
    ojson contents = file_contents_metrics(name, file.ir.row_count(), file.size_bytes);
    bus.publish(kTargetArtifactsTopic, artifacts_to_json({name, file.key, std::move(file.ir)}).dump());
    publish_metrics(bus, kTargetObserver, "ok", std::move(contents), {}, ojson{{"total", ms_since(start)}});
    return true;
  } catch (const std::exception& e) {
    publish_metrics(bus, kTargetObserver, "error", ojson{{"filename", name}}, e.what(),
                    ojson{{"total", ms_since(start)}});
    return false;
  }
}

WorkerResult run_worker(const PlanPayload& plan, const std::string& source_path, const std::string& out_dir,
                        const WorkerOptions& options) {
  const std::string name = file_name(source_path);
  if (name != plan.source_file)
    throw ContractViolation("plan was built for '" + plan.source_file + "', refusing to process '" + name + "'");

  WorkerResult result;
  auto t = Clock::now();
  const LoadedFile file = load_file(source_path);
  const ColumnSchema schema = schema_for(file.ir, plan.ir_schema);
  result.pre = dqs(file.ir, schema);
  result.timings["load"] = ms_since(t);

  t = Clock::now();
  const IR cleaned = apply_steps(file.ir, schema, plan.plan_steps);
  result.timings["clean"] = ms_since(t);

  t = Clock::now();
  const std::size_t shards = std::max<std::size_t>(1, std::min(options.workers, std::max<std::size_t>(1, cleaned.row_count())));
  std::vector<IR> parts(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t lo = cleaned.row_count() * s / shards;
    const std::size_t hi = cleaned.row_count() * (s + 1) / shards;
    parts[s] = IR(cleaned.headers(), std::vector<Row>(cleaned.rows().begin() + static_cast<std::ptrdiff_t>(lo),
                                                      cleaned.rows().begin() + static_cast<std::ptrdiff_t>(hi)));
  }
  std::vector<std::optional<TransformOutcome>> outcomes(shards);
  std::vector<std::string> shard_errors(shards);
  auto run_shard = [&](std::size_t s) {
    try {
      outcomes[s] = apply_transform_program(parts[s], plan.logic, plan.schema_map, 1.0);
    } catch (const std::exception& e) {
      shard_errors[s] = e.what();
    }
  };
  if (shards == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t s = 0; s < shards; ++s) threads.emplace_back(run_shard, s);
    for (auto& th : threads) th.join();
  }
  for (const auto& err : shard_errors)
    if (!err.empty()) throw TransformError(err);

  std::vector<Row> rows;
  std::size_t failed = 0, div0 = 0;
  std::vector<std::string> errors;
  ojson shard_rows = ojson::array();
  for (auto& o : outcomes) {
    failed += o->failed_cells;
    div0 += o->division_by_zero;
    for (auto& e : o->errors)
      if (errors.size() < 20) errors.push_back(e);
    shard_rows.push_back(o->ir.row_count());
    for (const auto& r : o->ir.rows()) rows.push_back(r);
  }
  std::vector<std::string> headers;
  for (const auto& c : plan.schema_map.correspondences) headers.push_back(c.target);
  result.output = IR(std::move(headers), std::move(rows));
  const std::size_t cells = result.output.cell_count();
  const std::size_t merged_rows = result.output.row_count();
  if (cells > 0 && static_cast<double>(failed) > kMaxFailedCellShare * static_cast<double>(cells))
    throw TransformError("transformation aborted: " + std::to_string(failed) + " of " + std::to_string(cells) +
                         " cells failed" + (errors.empty() ? std::string() : " (first: " + errors.front() + ")"));
  // projection onto the target columns can make distinct rows equal
  result.output = apply_drh(result.output);
  result.timings["transform"] = ms_since(t);

  t = Clock::now();
  result.post = dqs(result.output, infer_schema(result.output));
  const fs::path dir = fs::path(out_dir) / "output";
  fs::create_directories(dir);
  result.output_path = (dir / name).string();
  write_file(result.output_path, result.output, plan.reconstruction_key, file.format);
  result.timings["write"] = ms_since(t);

  auto& m = result.metrics;
  m["filename"] = name;
  m["output"] = (fs::path("output") / name).generic_string();
  m["rows_in"] = file.ir.row_count();
  m["rows_after_cleaning"] = cleaned.row_count();
  m["rows_transformed"] = merged_rows;
  m["rows_out"] = result.output.row_count();
  m["columns_out"] = result.output.column_count();
  m["plan"] = plan.plan_steps.label();
  m["workers"] = shards;
  m["shard_rows"] = std::move(shard_rows);
  m["pre_dqs"] = indicators_to_json(result.pre);
  m["post_dqs"] = indicators_to_json(result.post);
  m["failed_cells"] = failed;
  m["division_by_zero"] = div0;
  m["transform_errors"] = errors;
  return result;
}

RunReport compile_report(Bus& bus, ConsumerCursor& cursor) {
  std::vector<Message> messages;
  while (auto msg = bus.consume(cursor)) messages.push_back(std::move(*msg));
  return compile_report(messages);
}

RunReport load_report(const std::string& run_dir) {
  const fs::path path = fs::path(run_dir) / "bus" / (std::string(kMetricsTopic) + ".ndjson");
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<Message> messages;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("payload"))
      throw TranslationError("not a bus record", n);
    messages.push_back({j.value("offset", std::uint64_t{0}), j["payload"].get<std::string>(),
                        j.value("timestamp_ms", std::int64_t{0})});
  }
  return compile_report(messages);
}

RunReport compile_report(const std::vector<Message>& log) {
  ojson components = ojson::object();
  ojson timings = ojson::object();
  ojson errors = ojson::array();
  std::size_t messages = 0;
  for (const Message* msg = log.data(); msg != log.data() + log.size(); ++msg) {
    ++messages;
    const auto j = ojson::parse(msg->payload, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("from")) {
      errors.push_back("unreadable metrics message at offset " + std::to_string(msg->offset));
      continue;
    }
    const std::string from = j["from"].get<std::string>();
    ojson section;
    section["status"] = j.value("status", "unknown");
    section["contents"] = j.value("contents", ojson::object());
    if (j.contains("error")) {
      section["error"] = j["error"];
      errors.push_back(from + ": " + j["error"].get<std::string>());
    }
    components[from] = std::move(section);
    ojson t = j.value("timings", ojson::object());
    t["timestamp_ms"] = msg->timestamp_ms;
    timings[from] = std::move(t);
  }
  ojson absent = ojson::array();
  for (auto name : {kSourceObserver, kTargetObserver, kPlanner, kWorker})
    if (!components.contains(std::string(name))) absent.push_back(name);

  RunReport report;
  auto& r = report.json;
  r["report_version"] = kReportVersion;
  r["complete"] = absent.empty();
  r["succeeded"] = absent.empty() && errors.empty();
  r["metrics_messages"] = messages;
  r["components"] = std::move(components);
  r["absent"] = std::move(absent);
  r["errors"] = std::move(errors);
  r["timings"] = std::move(timings);
  report.text = render_report(r);
  return report;
}

std::string render_report(const ojson& report) {
  std::ostringstream out;
  out << "FlowETL run report (version " << report.value("report_version", 0) << ")\n";
  out << "status: " << (report.value("succeeded", false) ? "succeeded" : "failed")
      << (report.value("complete", false) ? "" : " (incomplete)") << "\n\n";
  const ojson components = report.value("components", ojson::object());
  for (auto it = components.begin(); it != components.end(); ++it) {
    const auto& sec = it.value();
    const auto& c = sec["contents"];
    out << it.key() << ": " << sec.value("status", "unknown");
    if (sec.contains("error")) out << " - " << sec["error"].get<std::string>();
    out << "\n";
    if (c.contains("objectsCount")) {
      out << "  file " << c.value("filename", "") << ", " << c["objectsCount"].get<std::size_t>() << " objects, "
          << fixed(c.value("filesizeMBs", 0.0), 3) << " MB";
      if (c.contains("sampleRows")) out << ", sample " << c["sampleRows"].get<std::size_t>() << " rows";
      out << "\n";
    }
    if (c.contains("chosen_plan")) {
      out << "  plan " << c["chosen_plan"].get<std::string>() << ", best DQS "
          << (c["best_dqs"].is_number() ? fixed(c["best_dqs"].get<double>(), 4) : std::string("n/a")) << ", "
          << c.value("candidates_evaluated", 0) << " candidates (" << c.value("failed_candidates", 0)
          << " failed)\n";
      if (c.contains("provider_calls")) out << "  provider calls " << c["provider_calls"].size() << "\n";
      for (const auto& w : c.value("warnings", ojson::array())) out << "  warning: " << w.get<std::string>() << "\n";
    }
    if (c.contains("post_dqs")) {
      out << "  rows " << c.value("rows_in", 0) << " -> " << c.value("rows_out", 0) << ", DQS "
          << fixed(c["pre_dqs"].value("dqs", 0.0), 4) << " -> " << fixed(c["post_dqs"].value("dqs", 0.0), 4)
          << "\n";
      out << "  output " << c.value("output", "") << "\n";
    }
  }
  const ojson absent = report.value("absent", ojson::array());
  for (const auto& a : absent) out << a.get<std::string>() << ": absent\n";
  const ojson errors = report.value("errors", ojson::array());
  if (!errors.empty()) {
    out << "\nerrors:\n";
    for (const auto& e : errors) out << "  " << e.get<std::string>() << "\n";
  }
  return out.str();
}

void apply_config_file(PipelineConfig& config, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto j = ojson::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ContractViolation("config file must hold a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "source") config.source = v.get<std::string>();
      else if (k == "target") config.target = v.get<std::string>();
      else if (k == "out") config.out_dir = v.get<std::string>();
      else if (k == "seed") config.seed = v.get<std::uint64_t>();
      else if (k == "sample_floor") config.sampling.floor = v.get<std::size_t>();
      else if (k == "sample_pct") config.sampling.pct = v.get<double>();
      else if (k == "workers") config.workers = v.get<std::size_t>();
      else if (k == "provider") {
        const auto mode = v.get<std::string>();
        if (mode == "algorithmic") config.mode = ProviderMode::Algorithmic;
        else if (mode == "remote") config.mode = ProviderMode::Remote;
        else throw ContractViolation("unknown provider '" + mode + "'");
      } else if (k == "provider_url") config.provider.url = v.get<std::string>();
      else if (k == "provider_key") config.provider.key = v.get<std::string>();
      else if (k == "provider_timeout_ms") config.provider.timeout_ms = v.get<int>();
      else throw ContractViolation("unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("config file: ") + e.what());
  }
}

PipelineResult run_pipeline(const PipelineConfig& config) { return run_pipeline(config, nullptr); }

PipelineResult run_pipeline(const PipelineConfig& config, Provider* provider) {
  const fs::path out_dir = config.out_dir;
  fs::create_directories(out_dir);

  std::unique_ptr<Provider> owned;
  if (config.mode == ProviderMode::Remote && !provider) {
    owned = std::make_unique<HttpProvider>(config.provider);
    provider = owned.get();
  }

  Bus bus;
  for (const auto& t : standard_topics()) bus.subscribe(t);
  std::optional<PlanPayload> plan;
  std::optional<WorkerResult> worker;
  {
    std::vector<std::thread> tasks;
    tasks.emplace_back([&] { observe_source(bus, config.source, config.seed, config.sampling); });
    tasks.emplace_back([&] { observe_target(bus, config.target); });
    tasks.emplace_back([&] { planner_task(bus, config, provider); });
    tasks.emplace_back([&] { worker_task(bus, config, out_dir, plan, worker); });
    for (auto& t : tasks) t.join();
  }

  PipelineResult result;
  ConsumerCursor cursor = bus.subscribe(kMetricsTopic);
  result.report = compile_report(bus, cursor);
  if (provider) result.provider_calls = provider->calls();
  if (worker) result.output_path = worker->output_path;
  result.exit_code = result.report.json["succeeded"].get<bool>() ? 0 : 1;

  write_text(out_dir / "report.json", result.report.json.dump(2) + "\n");
  write_text(out_dir / "report.txt", result.report.text);
  if (const auto plans = bus.snapshot(kPlansTopic); !plans.empty())
    write_text(out_dir / "plan.json", ojson::parse(plans.front().payload).dump(2) + "\n");
  bus.persist((out_dir / "bus").string());
  return result;
}

}  // namespace flowetl
