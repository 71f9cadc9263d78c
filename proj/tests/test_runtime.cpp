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

#include "flowetl/errors.hpp"
#include "flowetl/evalkit.hpp"
#include "flowetl/runtime.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace flowetl;
using flowetl::testing::read_text;
using flowetl::testing::temp_dir;
using flowetl::testing::write_text;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const char* kObjects =
    R"({"objects":[{"ID":1,"name":"John","age":50,"salary":1234},{"ID":2,"name":"Amy","salary":5678},{"ID":3,"name":"Ellie"}]})";
const char* kRenameTarget = R"({"objects":[{"id":1,"name":"John","age":50,"salary":1234}]})";

// integer form of min(n, max(ceil(n * pct), floor)) for pct = k / 100
std::size_t rule(std::size_t n, std::size_t pct_percent, std::size_t floor) {
  return std::min(n, std::max((n * pct_percent + 99) / 100, floor));
}

std::vector<ojson> metrics(Bus& bus) {
  std::vector<ojson> out;
  for (const auto& m : bus.snapshot(kMetricsTopic)) out.push_back(ojson::parse(m.payload));
  return out;
}

ojson without_timings(ojson report) {
  report.erase("timings");
  return report;
}

}  // namespace

TEST_CASE("sampling rule") {
  CHECK(sample_size(7557) == 378);
  CHECK(sample_size(40) == 40);
  CHECK(sample_size(1) == 1);
  CHECK(sample_size(0) == 0);
  CHECK(sample_size(1000) == 50);
  CHECK(sample_size(1001) == 51);
  CHECK(sample_size(100000) == 5000);
  CHECK(sample_size(1000, {0.5, 50}) == 500);
  CHECK(sample_size(1000, {0.05, 10}) == 50);
  for (std::size_t n = 1; n <= 100000; ++n)
    if (sample_size(n) != rule(n, 5, 50)) {
      CHECK(sample_size(n) == rule(n, 5, 50));
      break;
    }
  for (std::size_t pct : {5, 10, 20, 30, 50})
    for (std::size_t n : {1, 49, 50, 99, 999, 1000, 7557, 12345, 100000})
      CHECK(sample_size(n, {static_cast<double>(pct) / 100.0, 50}) == rule(n, pct, 50));
}

TEST_CASE("sample_indices") {
  const auto a = sample_indices(1000, 50, 9);
  CHECK(a.size() == 50);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 50);
  CHECK(a.back() < 1000);
  CHECK(sample_indices(1000, 50, 9) == a);
  CHECK(sample_indices(1000, 50, 10) != a);
  CHECK(sample_indices(5, 50, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(sample_indices(0, 3, 1).empty());

  // uniformity: every index of 20 drawn about equally often over many seeds
  std::vector<int> hits(20, 0);
  for (std::uint64_t s = 0; s < 4000; ++s)
    for (auto i : sample_indices(20, 5, s)) ++hits[i];
  for (int h : hits) CHECK(std::abs(h - 1000) < 150);
}

TEST_CASE("observers") {
  const auto dir = temp_dir("observers");
  std::string csv = "a,b\n";
  for (int i = 0; i < 120; ++i) csv += std::to_string(i) + ",x" + std::to_string(i) + "\n";
  write_text(dir / "s.csv", csv);
  write_text(dir / "t.csv", "a,b\n1,2\n3,4\n5,6\n7,8\n9,10\n11,12\n");
  write_text(dir / "bad.json", "{\"objects\": [1, 2");

  Bus bus;
  CHECK(observe_source(bus, (dir / "s.csv").string(), 4));
  CHECK(observe_target(bus, (dir / "t.csv").string()));
  CHECK_FALSE(observe_source(bus, (dir / "bad.json").string(), 4));
  CHECK_FALSE(observe_target(bus, (dir / "nope.csv").string()));

  const auto src = artifacts_from_json(ojson::parse(bus.snapshot(kSourceArtifactsTopic).at(0).payload));
  CHECK(src.name == "s.csv");
  CHECK(src.contents.row_count() == 50);
  const auto tgt = artifacts_from_json(ojson::parse(bus.snapshot(kTargetArtifactsTopic).at(0).payload));
  CHECK(tgt.contents.row_count() == 6);
  CHECK(tgt.key.path.empty());
  CHECK(bus.size(kSourceArtifactsTopic) == 1);
  CHECK(bus.size(kTargetArtifactsTopic) == 1);

  const auto m = metrics(bus);
  REQUIRE(m.size() == 4);
  CHECK(m[0]["from"] == "source-observer");
  CHECK(m[0]["contents"]["objectsCount"] == 120);
  CHECK(m[0]["contents"]["sampleRows"] == 50);
  CHECK(m[0]["contents"]["filesizeMBs"].get<double>() > 0.0);
  CHECK(m[1]["contents"]["objectsCount"] == 6);
  CHECK(m[2]["status"] == "error");
  CHECK(m[2].contains("error"));
  CHECK(m[3]["status"] == "error");

  // same seed, same sample
  Bus again;
  observe_source(again, (dir / "s.csv").string(), 4);
  CHECK(again.snapshot(kSourceArtifactsTopic)[0].payload == bus.snapshot(kSourceArtifactsTopic)[0].payload);
  fs::remove_all(dir);
}

TEST_CASE("run_worker") {
  const auto dir = temp_dir("worker");
  write_text(dir / "clean.csv", "a,b\n1,x\n2,y\n3,z\n");
  PlanPayload plan;
  plan.source_file = "clean.csv";
  plan.schema_map.correspondences = {{{"a"}, "a"}, {{"b"}, "b"}};
  plan.logic = identity_program(plan.schema_map);
  plan.ir_schema = ColumnSchema({{"a", ColumnType::Number}, {"b", ColumnType::String}});

  SUBCASE("identity on a clean file") {
    const auto r = run_worker(plan, (dir / "clean.csv").string(), (dir / "out").string());
    CHECK(read_text(r.output_path) == "a,b\n1,x\n2,y\n3,z\n");
    CHECK(fs::path(r.output_path) == dir / "out" / "output" / "clean.csv");
    CHECK(r.pre.dqs == 1.0);
    CHECK(r.post.dqs == 1.0);
    CHECK(r.metrics["rows_out"] == 3);
  }
  SUBCASE("a plan for another file is refused") {
    write_text(dir / "other.csv", "a,b\n1,x\n");
    CHECK_THROWS_AS(run_worker(plan, (dir / "other.csv").string(), (dir / "out").string()), ContractViolation);
  }
  SUBCASE("polluted corpus pairs: post >= pre, workers agree") {
    CorpusSpec spec;
    spec.sizes = {200, 200, 200, 200, 200, 200, 200, 200, 200, 200, 200, 200};
    const auto corpus = generate_corpus(spec);
    for (std::size_t k = 0; k < corpus.size(); k += 3) {
      const auto& pair = corpus[k];
      CAPTURE(pair.name);
      const std::string ext = pair.format == FileFormat::Json ? ".json" : ".csv";
      const auto path = dir / ("src" + ext);
      write_text(path, pair.format == FileFormat::Json ? ir_to_json(pair.polluted, pair.key) : ir_to_csv(pair.polluted));
      PlanPayload p;
      p.source_file = path.filename().string();
      p.reconstruction_key = pair.key;
      p.schema_map = pair.map;
      p.logic = pair.program;
      p.ir_schema = infer_schema(pair.polluted);
      const auto one = run_worker(p, path.string(), (dir / "o1").string());
      const auto four = run_worker(p, path.string(), (dir / "o4").string(), {4});
      CHECK(one.post.dqs >= one.pre.dqs);
      CHECK(one.output == four.output);
      CHECK(read_text(one.output_path) == read_text(four.output_path));
      CHECK(one.post.missing_ratio == 0.0);
      CHECK(one.post.duplicate_ratio == 0.0);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("compile_report") {
  SUBCASE("empty metrics") {
    const auto r = compile_report(std::vector<Message>{});
    CHECK(r.json["report_version"] == kReportVersion);
    CHECK(r.json["complete"] == false);
    CHECK(r.json["succeeded"] == false);
    CHECK(r.json["components"].empty());
    CHECK(r.json["absent"].size() == 4);
    CHECK_FALSE(r.text.empty());
  }
  SUBCASE("observer failure") {
    Bus bus;
    observe_source(bus, "/nonexistent/source.csv", 1);
    auto cur = bus.subscribe(kMetricsTopic);
    const auto r = compile_report(bus, cur);
    CHECK(r.json["components"]["source-observer"]["status"] == "error");
    CHECK_FALSE(r.json["components"].contains("worker"));
    CHECK(r.json["succeeded"] == false);
    CHECK_FALSE(bus.consume(cur));
  }
  SUBCASE("malformed messages are reported, malformed files rejected") {
    const auto r = compile_report(std::vector<Message>{{0, "not json", 0}});
    REQUIRE(r.json["errors"].size() == 1);
    CHECK(r.json["errors"][0].get<std::string>().find("unreadable") != std::string::npos);
    const auto dir = temp_dir("report");
    fs::create_directories(dir / "bus");
    write_text(dir / "bus" / "metrics.ndjson", "{\"offset\":0}\n");
    CHECK_THROWS_AS(load_report(dir.string()), TranslationError);
    fs::remove_all(dir);
  }
}

TEST_CASE("run_pipeline") {
  const auto dir = temp_dir("pipeline");
  write_text(dir / "people.json", kObjects);
  write_text(dir / "people_target.json", kRenameTarget);

  PipelineConfig config;
  config.source = (dir / "people.json").string();
  config.target = (dir / "people_target.json").string();
  config.out_dir = (dir / "run").string();
  config.seed = 5;

  SUBCASE("rename on the objects payload") {
    const auto r = run_pipeline(config);
    REQUIRE(r.exit_code == 0);
    // median imputation fills age with 50 and salary with median(1234, 5678)
    const std::string expected_text =
        R"({"objects":[{"id":1,"name":"John","age":50,"salary":1234},{"id":2,"name":"Amy","age":50,"salary":5678},{"id":3,"name":"Ellie","age":50,"salary":3456}]})";
    CHECK(nlohmann::json::parse(read_text(r.output_path)) == nlohmann::json::parse(expected_text));
    CHECK(r.report.json["metrics_messages"].get<int>() >= 4);
    for (const char* c : {"source-observer", "target-observer", "planner", "worker"})
      CHECK(r.report.json["components"][c]["status"] == "ok");
    for (const char* f : {"report.json", "report.txt", "plan.json", "bus/metrics.ndjson"})
      CHECK(fs::exists(dir / "run" / f));
    CHECK(without_timings(load_report((dir / "run").string()).json) == without_timings(r.report.json));
  }
  SUBCASE("fixed seed gives the same report") {
    const auto a = run_pipeline(config);
    config.out_dir = (dir / "run2").string();
    const auto b = run_pipeline(config);
    CHECK(without_timings(a.report.json) == without_timings(b.report.json));
    CHECK(read_text(a.output_path) == read_text(b.output_path));
  }
  SUBCASE("missing source") {
    config.source = (dir / "absent.csv").string();
    const auto r = run_pipeline(config);
    CHECK(r.exit_code != 0);
    CHECK(r.report.json["components"]["source-observer"]["status"] == "error");
    CHECK_FALSE(r.report.json["components"].contains("worker"));
    CHECK(fs::exists(dir / "run" / "report.json"));
  }
  SUBCASE("config file") {
    write_text(dir / "cfg.json", R"({"seed": 11, "workers": 3, "sample_pct": 0.2, "provider": "algorithmic"})");
    PipelineConfig c;
    apply_config_file(c, (dir / "cfg.json").string());
    CHECK(c.seed == 11);
    CHECK(c.workers == 3);
    CHECK(c.sampling.pct == 0.2);
    write_text(dir / "bad.json", R"({"sead": 1})");
    CHECK_THROWS_AS(apply_config_file(c, (dir / "bad.json").string()), ContractViolation);
    write_text(dir / "bad2.json", R"({"provider": "magic"})");
    CHECK_THROWS_AS(apply_config_file(c, (dir / "bad2.json").string()), ContractViolation);
  }
  fs::remove_all(dir);
}
