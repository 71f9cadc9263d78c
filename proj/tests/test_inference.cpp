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
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace flowetl;
using ojson = nlohmann::ordered_json;

namespace {

CellValue n(double v) { return CellValue::number(v); }
CellValue t(const std::string& s) { return CellValue::text(s); }
Expr col(const char* c) { return Expr::col(c); }

IR column(const char* name, std::vector<CellValue> cells) {
  std::vector<Row> rows;
  for (auto& c : cells) rows.push_back(Row{std::move(c)});
  return IR({name}, std::move(rows));
}

SchemaMap single(std::vector<std::string> sources, std::string target) {
  SchemaMap m;
  m.correspondences.push_back({std::move(sources), std::move(target)});
  return m;
}

const char* kFirst[] = {"John", "Mary", "Ann", "Luis", "Omar", "Ines", "Kai", "Zoe", "Ravi", "Nora"};
const char* kLast[] = {"Doe", "Smith", "Lee", "Garcia", "Khan", "Silva", "Berg", "Ito", "Rossi", "Kerr"};

// 20 people; target rows are a shuffled subset, as the runtime samples them
struct People {
  IR source;
  IR target;
  SchemaMap map;
};

People people(std::mt19937_64& rng) {
  std::vector<Row> src;
  for (int i = 0; i < 20; ++i) {
    const std::string date = "2024-0" + std::to_string(1 + i % 9) + "-1" + std::to_string(i % 10);
    src.push_back(Row{n(100 + i), t(kFirst[i % 10]), t(kLast[(i * 3) % 10]),
                      t("u" + std::to_string(i) + "@example.com"), t(date)});
  }
  People p;
  p.source = IR({"id", "first", "last", "email", "joined"}, src);
  std::vector<std::size_t> pick(20);
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);
  std::vector<Row> tgt;
  for (std::size_t k = 0; k < 6; ++k) {
    const Row& r = src[pick[k]];
    const std::string d = r[4].as_text();
    tgt.push_back(Row{r[0], t(r[1].as_text() + " " + r[2].as_text()), r[3],
                      t(d.substr(8, 2) + "/" + d.substr(5, 2) + "/" + d.substr(0, 4))});
  }
  p.target = IR({"ID", "name", "mail", "since"}, tgt);
  p.map.correspondences = {{{"id"}, "ID"}, {{"first", "last"}, "name"}, {{"email"}, "mail"}, {{"joined"}, "since"}};
  return p;
}

ojson date_program() {
  TransformationProgram p{{{"ID", col("id")},
                           {"name", Expr::concat({col("first"), col("last")}, " ")},
                           {"mail", col("email")},
                           {"since", Expr::format(col("joined"), "{2}/{1}/{0}")}}};
  return ojson{{"program", program_to_json(p)}};
}

}  // namespace

TEST_CASE("ladder on positional samples") {
  SUBCASE("identity") {
    const auto p = infer_program_fallback(column("a", {t("1"), t("2")}), column("b", {t("1"), t("2")}), single({"a"}, "b"));
    CHECK(p.entries[0].expr == col("a"));
  }
  SUBCASE("concat with a space") {
    const IR src({"first", "last"}, {Row{t("John"), t("Doe")}});
    const auto p = infer_program_fallback(src, column("full", {t("John Doe")}), single({"first", "last"}, "full"));
    CHECK(p.entries[0].expr == Expr::concat({col("first"), col("last")}, " "));
    CHECK(eval_expr(p.entries[0].expr, {{"first", t("John")}, {"last", t("Doe")}}) == t("John Doe"));
  }
  SUBCASE("affine 2x + 1") {
    const auto p = infer_program_fallback(column("x", {n(10), n(20)}), column("y", {n(21), n(41)}), single({"x"}, "y"));
    CHECK(p.entries[0].expr == make_affine("x", 2, 1));
    CHECK(expr_kind(p.entries[0].expr) == "affine");
    for (double x : {10.0, 20.0, -3.0, 0.5}) CHECK(eval_expr(p.entries[0].expr, {{"x", n(x)}}) == n(2 * x + 1));
  }
  SUBCASE("affine needs every example") {
    Diagnostics d;
    const auto p =
        infer_program_fallback(column("x", {n(1), n(2), n(3)}), column("y", {n(3), n(5), n(8)}), single({"x"}, "y"), &d);
    CHECK(expr_kind(p.entries[0].expr) != "affine");
  }
  SUBCASE("upper case and map lookup") {
    const auto up = infer_program_fallback(column("d", {t("sales"), t("legal")}), column("D", {t("SALES"), t("LEGAL")}),
                                           single({"d"}, "D"));
    CHECK(up.entries[0].expr == Expr::format(col("d"), "{:upper}"));
    const auto yn = infer_program_fallback(column("b", {CellValue::boolean(true), CellValue::boolean(false)}),
                                           column("B", {t("Y"), t("N")}), single({"b"}, "B"));
    CHECK(expr_kind(yn.entries[0].expr) == "map");
  }
  SUBCASE("no hypothesis: identity with a warning") {
    Diagnostics d;
    const auto p = infer_program_fallback(column("a", {t("cat"), t("dog")}), column("b", {t("x1"), t("x1 z")}),
                                          single({"a"}, "b"), &d);
    CHECK(p.entries[0].expr == col("a"));
    CHECK(d.warnings().size() == 1);
  }
  CHECK_THROWS_AS(infer_program_fallback(column("a", {}), IR({"b"}), single({"a"}, "b")), TransformError);
  CHECK_THROWS_AS(infer_program_fallback(column("a", {t("1")}), column("b", {t("1"), t("2")}), single({"a"}, "b")),
                  ContractViolation);
}

TEST_CASE("helpers") {
  CHECK(value_shape("AB-12 x") == "A-9 a");
  CHECK(value_shape("") == "");
  CHECK(make_affine("x", 1, 0) == col("x"));
  CHECK(make_affine("x", 100, 0) == Expr::arith(ArithOp::Mul, col("x"), Expr::constant(n(100))));
  CHECK_FALSE(infer_prompt_template().empty());
}

TEST_CASE("alignment pairs shuffled subsets") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 20; ++i) {
    const People p = people(rng);
    const AlignedSamples a = align_samples(p.source, p.target, p.map);
    REQUIRE(a.target.row_count() == p.target.row_count());
    for (std::size_t r = 0; r < a.target.row_count(); ++r) CHECK(a.source.rows()[r][0] == a.target.rows()[r][0]);
    const auto prog = infer_program_local(p.source, p.target, p.map);
    CHECK(prog.find("name")->expr == Expr::concat({col("first"), col("last")}, " "));
    CHECK(prog.find("ID")->expr == col("id"));
  }
  // a lone low-information value is no evidence
  const IR src({"flag", "v"}, {Row{t("a"), n(1)}, Row{t("a"), n(2)}, Row{t("b"), n(3)}});
  const IR tgt({"F"}, {Row{t("a")}});
  CHECK(align_samples(src, tgt, single({"flag"}, "F")).target.row_count() == 0);
}

TEST_CASE("remote inference") {
  std::mt19937_64 rng(72);
  const People p = people(rng);

  SUBCASE("provider program that only it can find is accepted after verification") {
    flowetl::testing::ScriptedProvider provider;
    provider.push_body(date_program());
    Diagnostics d;
    const auto prog = infer_program_remote(p.source, p.target, p.map, provider, d);
    CHECK(prog == program_from_json(date_program()["program"]));
    CHECK(d.warnings().empty());
    REQUIRE(provider.requests.size() == 1);
    const auto& req = provider.requests[0];
    CHECK(req["schema_map"] == schema_map_to_json(p.map));
    CHECK(req.contains("prompt"));
    CHECK(ir_from_wire(req["source_sample"]).row_count() <= kMaxPromptRows);
  }
  SUBCASE("the local program is accepted") {
    flowetl::testing::ScriptedProvider provider;
    const auto local = infer_program_local(p.source, p.target, p.map);
    provider.push_body(ojson{{"program", program_to_json(local)}});
    Diagnostics d;
    CHECK(infer_program_remote(p.source, p.target, p.map, provider, d) == local);
  }
  SUBCASE("hallucinated column, wrong values, junk and errors fall back") {
    const auto local = infer_program_local(p.source, p.target, p.map);
    ojson hallucinated = date_program();
    hallucinated["program"]["columns"][0]["expr"]["name"] = "customer_number";
    ojson wrong = date_program();
    wrong["program"]["columns"][3]["expr"]["pattern"] = "{0}/{1}/{2}";
    flowetl::testing::ScriptedProvider provider;
    provider.push_body(hallucinated);
    provider.push_body(wrong);
    provider.push_body(ojson{{"text", "sure, here you go"}});
    provider.push_body(ojson{{"program", {{"columns", {{{"target", "ID"}, {"expr", {{"op", "eval"}}}}}}}}});
    provider.push_error("timeout after 30000 ms");
    Diagnostics d;
    for (int i = 0; i < 5; ++i) CHECK(infer_program_remote(p.source, p.target, p.map, provider, d) == local);
    const auto w = d.warnings();
    CHECK(std::count_if(w.begin(), w.end(), [](const std::string& s) {
            return s.find("inference provider rejected") != std::string::npos;
          }) == 5);
    CHECK(w.front().find("customer_number") != std::string::npos);
    CHECK(provider.calls().size() == 5);
  }
}

TEST_CASE("property: the fallback reproduces every example it was given") {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 300; ++i) {
    const std::size_t rows = 2 + rng() % 10;
    std::vector<Row> src;
    for (std::size_t r = 0; r < rows; ++r)
      src.push_back(Row{n(static_cast<double>(rng() % 500)), t(kFirst[rng() % 10]), t(kLast[rng() % 10])});
    const IR source({"x", "f", "l"}, src);
    Expr truth = col("x");
    std::vector<std::string> sources{"x"};
    switch (rng() % 4) {
      case 0: truth = make_affine("x", static_cast<double>(1 + rng() % 9) / 4.0, static_cast<double>(rng() % 50)); break;
      case 1:
        truth = Expr::concat({col("f"), col("l")}, rng() % 2 ? " " : ", ");
        sources = {"f", "l"};
        break;
      case 2:
        truth = Expr::format(col("l"), "{:upper}");
        sources = {"l"};
        break;
      default: break;
    }
    const SchemaMap map = single(sources, "out");
    const TransformationProgram gt{{{"out", truth}}};
    const IR target = apply_transform_program(source, gt, map).ir;
    Diagnostics d;
    const auto inferred = infer_program_fallback(source, target, map, &d);
    const IR replay = apply_transform_program(source, inferred, map).ir;
    bool reproduced = true;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& a = replay.rows()[r][0];
      const auto& b = target.rows()[r][0];
      reproduced = reproduced && (a == b || (a.is_number() && b.is_number() &&
                                             std::fabs(a.as_number() - b.as_number()) <= 1e-9 * std::fabs(b.as_number())));
    }
    CHECK(reproduced);
    CHECK(d.warnings().empty());
  }
}
