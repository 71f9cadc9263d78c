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
#include "flowetl/inference.hpp"
#include "flowetl/provider_stub.hpp"
#include "flowetl/runtime.hpp"
#include "flowetl/schema_match.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace flowetl;
using flowetl::testing::read_text;
using flowetl::testing::temp_dir;
using flowetl::testing::write_text;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const char* kObjects =
    R"({"objects":[{"ID":1,"name":"John","age":50,"salary":1234},{"ID":2,"name":"Amy","salary":5678},{"ID":3,"name":"Ellie"}]})";
const char* kTarget = R"({"objects":[{"id":1,"name":"John","age":50,"salary":1234}]})";

ColumnSchema strings(std::initializer_list<const char*> names) {
  std::vector<ColumnSchema::Entry> e;
  for (const char* n : names) e.emplace_back(n, ColumnType::String);
  return ColumnSchema(e);
}

ProviderConfig client(const ProviderStub& stub, int timeout_ms = 5000) { return {stub.url(), "k-123", timeout_ms}; }

ojson rename_map() {
  SchemaMap m;
  m.correspondences = {{{"ID"}, "id"}, {{"name"}, "name"}, {{"age"}, "age"}, {{"salary"}, "salary"}};
  return schema_map_to_json(m);
}

ojson rename_program() {
  TransformationProgram p{
      {{"id", Expr::col("ID")}, {"name", Expr::col("name")}, {"age", Expr::col("age")}, {"salary", Expr::col("salary")}}};
  return ojson{{"program", program_to_json(p)}};
}

}  // namespace

TEST_CASE("scripted valid map is accepted") {
  const auto src = strings({"first_name", "last_name", "email"});
  const auto tgt = strings({"full_name", "email"});
  const std::string body =
      R"({"correspondences":[{"sources":["first_name","last_name"],"target":"full_name"},{"sources":["email"],"target":"email"}]})";
  ProviderStub stub({{ScriptedResponse::raw(body)}});
  HttpProvider provider(client(stub));
  Diagnostics d;
  const auto m = match_via_provider(src, tgt, provider, d);
  CHECK(d.warnings().empty());
  REQUIRE(m.correspondences.size() == 2);
  CHECK(m.correspondences[0] == Correspondence{{"first_name", "last_name"}, "full_name"});

  const auto log = stub.requests();
  REQUIRE(log.size() == 1);
  CHECK(log.size() == provider.calls().size());
  CHECK(log[0].endpoint == "match");
  CHECK(log[0].authorization == "Bearer k-123");
  CHECK(ojson::parse(log[0].body)["source_schema"] == schema_to_json(src));
  CHECK(stub.exhausted());
}

TEST_CASE("scripted failures fall back") {
  const auto src = strings({"first_name", "last_name", "email"});
  const auto tgt = strings({"full_name", "email"});
  const auto algorithmic = match_algorithmic(build_bipartite(src, tgt));

  SUBCASE("malformed JSON") {
    ProviderStub stub({{ScriptedResponse::raw("{\"correspondences\": [")}});
    HttpProvider provider(client(stub));
    Diagnostics d;
    CHECK(match_via_provider(src, tgt, provider, d) == algorithmic);
    REQUIRE(d.warnings().size() == 1);
    CHECK(d.warnings()[0].find("schema match provider rejected") != std::string::npos);
  }
  SUBCASE("delay beyond the client timeout") {
    ProviderStub stub({{ScriptedResponse::delayed(ScriptedResponse::json(rename_map()), 800)}});
    HttpProvider provider(client(stub, 150));
    Diagnostics d;
    CHECK(match_via_provider(src, tgt, provider, d) == algorithmic);
    CHECK(d.warnings().size() == 1);
    REQUIRE(provider.calls().size() == 1);
    CHECK_FALSE(provider.calls()[0].ok);
    CHECK(provider.calls()[0].elapsed_ms < 800);
  }
  SUBCASE("server error status") {
    ProviderStub stub({{ScriptedResponse::json(rename_map(), 500)}});
    HttpProvider provider(client(stub));
    Diagnostics d;
    CHECK(match_via_provider(src, tgt, provider, d) == algorithmic);
    CHECK(provider.calls()[0].error.find("500") != std::string::npos);
  }
}

TEST_CASE("routing and exhaustion") {
  ProviderStub stub({{ScriptedResponse::raw("{}"), ScriptedResponse::raw("{}")}});
  HttpProvider provider(client(stub));
  const auto other = provider.request("other", ojson::object());
  CHECK_FALSE(other.ok);
  CHECK(other.error.find("404") != std::string::npos);
  CHECK(stub.remaining() == 2);

  CHECK(provider.request("infer", ojson::object()).ok);
  CHECK(provider.request("match", ojson::object()).ok);
  CHECK(stub.exhausted());
  stub.wait();
  const auto refused = provider.request("match", ojson::object());
  CHECK_FALSE(refused.ok);
  CHECK(refused.error.find("transport error") != std::string::npos);

  // the stub never rewrites a reply
  const std::string raw = "{\"b\": 1,   \"a\": [2]}";
  ProviderStub verbatim({{ScriptedResponse::raw(raw)}});
  HttpProvider p2(client(verbatim));
  CHECK(p2.request("infer", ojson::object()).body.dump() == ojson::parse(raw).dump());

  ProviderStub empty({});
  empty.wait();
  CHECK_FALSE(HttpProvider(client(empty)).request("match", ojson::object()).ok);
}

TEST_CASE("script_from_json") {
  const auto s = script_from_json(ojson::parse(R"([{"body": {"x": 1}}, {"status": 500, "body": "oops", "delay_ms": 30}])"));
  REQUIRE(s.responses.size() == 2);
  CHECK(s.responses[0].status == 200);
  CHECK(s.responses[0].body == "{\"x\":1}");
  CHECK(s.responses[1].body == "oops");
  CHECK(s.responses[1].delay_ms == 30);
  CHECK_THROWS_AS(script_from_json(ojson::object()), ContractViolation);
  CHECK_THROWS_AS(script_from_json(ojson::parse(R"([{"status": 200}])")), ContractViolation);
}

TEST_CASE("pipeline runs make exactly two provider calls") {
  const auto dir = temp_dir("stub_pipeline");
  write_text(dir / "people.json", kObjects);
  write_text(dir / "people_target.json", kTarget);
  PipelineConfig config;
  config.source = (dir / "people.json").string();
  config.target = (dir / "people_target.json").string();
  config.seed = 3;
  config.out_dir = (dir / "baseline").string();
  const auto baseline = run_pipeline(config);
  REQUIRE(baseline.exit_code == 0);
  const std::string expected = read_text(baseline.output_path);

  const std::vector<std::pair<const char*, ProviderScript>> scripts{
      {"valid", {{ScriptedResponse::json(rename_map()), ScriptedResponse::json(rename_program())}}},
      {"malformed", {{ScriptedResponse::raw("{not json"), ScriptedResponse::raw("[1, 2")}}},
      {"timeout",
       {{ScriptedResponse::delayed(ScriptedResponse::json(rename_map()), 700),
         ScriptedResponse::delayed(ScriptedResponse::json(rename_program()), 700)}}},
      {"errors", {{ScriptedResponse::raw("{}", 503), ScriptedResponse::json(ojson{{"program", "nope"}})}}},
  };
  for (const auto& [name, script] : scripts) {
    const std::string label = name;
    CAPTURE(label);
    ProviderStub stub(script);
    config.mode = ProviderMode::Remote;
    config.provider = client(stub, 200);
    config.out_dir = (dir / name).string();
    const auto r = run_pipeline(config);
    CHECK(r.exit_code == 0);
    CHECK(r.provider_calls.size() == 2);
    stub.wait();  // a timed-out request is logged once the stub gets to it
    CHECK(stub.requests().size() == 2);
    CHECK(read_text(r.output_path) == expected);
    CHECK(r.report.json["components"]["planner"]["contents"]["provider_calls"].size() == 2);
  }
  fs::remove_all(dir);
}
