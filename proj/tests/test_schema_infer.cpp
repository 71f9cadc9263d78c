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
#include "flowetl/schema.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace flowetl;

namespace {

IR column_of(std::vector<CellValue> cells) {
  std::vector<Row> rows;
  for (auto& c : cells) rows.push_back(Row{std::move(c)});
  return IR({"x"}, std::move(rows));
}

CellValue t(const char* s) { return CellValue::text(s); }

ColumnType type_of(std::vector<CellValue> cells) { return infer_schema(column_of(std::move(cells))).at("x"); }

}  // namespace

TEST_CASE("type rules") {
  CHECK(type_of({t("Y"), t("N"), t("Y")}) == ColumnType::Boolean);
  CHECK(type_of({t("1"), t("2"), t("[3]")}) == ColumnType::Ambiguous);
  CHECK(type_of({t("0"), t("1"), t("0"), t("1")}) == ColumnType::Boolean);
  CHECK(type_of({t("5.5"), CellValue::missing(), t("7.1")}) == ColumnType::Number);
  CHECK(type_of({CellValue::number(1), CellValue::number(2), CellValue::number(3)}) == ColumnType::Number);
  CHECK(type_of({t("a"), t("b"), t("c")}) == ColumnType::String);
  CHECK(type_of({t("[1]"), t("{}"), t("[2]")}) == ColumnType::Complex);
  CHECK(type_of({t("a"), t("b"), CellValue::number(1)}) == ColumnType::Ambiguous);
}

TEST_CASE("edge rules") {
  // all Missing -> string
  CHECK(type_of({CellValue::missing(), CellValue::missing()}) == ColumnType::String);
  CHECK(type_of({}) == ColumnType::String);
  // one distinct value is not boolean
  CHECK(type_of({t("7"), t("7"), t("7")}) == ColumnType::Number);
  // 1 and 1.0 are one value, so this column has two distinct values
  CHECK(type_of({CellValue::number(1), CellValue::number(1.0), CellValue::number(2)}) == ColumnType::Boolean);
  // empty text is skipped like Missing
  CHECK(type_of({t(""), t("4"), t("5"), t("6")}) == ColumnType::Number);
  // two values seen once each carry no evidence of a binary encoding
  CHECK(type_of({t("a"), t("b")}) == ColumnType::String);
  CHECK(type_of({t("1"), t("[1]")}) == ColumnType::Ambiguous);
  // real booleans
  CHECK(type_of({CellValue::boolean(true), CellValue::boolean(false)}) == ColumnType::Boolean);
}

TEST_CASE("schema container") {
  ColumnSchema s({{"a", ColumnType::Number}, {"b", ColumnType::String}});
  CHECK(s.at("b") == ColumnType::String);
  CHECK_THROWS_AS(s.at("zz"), ContractViolation);
  CHECK_FALSE(s.find("zz"));
  s.set("c", ColumnType::Boolean);
  CHECK(s.size() == 3);
  CHECK(s.restricted_to({"c", "a"}).entries() ==
        std::vector<ColumnSchema::Entry>{{"c", ColumnType::Boolean}, {"a", ColumnType::Number}});
  CHECK(schema_from_json(schema_to_json(s)) == s);
  CHECK_THROWS_AS(column_type_from_string("float"), ContractViolation);
  for (auto type : {ColumnType::Number, ColumnType::String, ColumnType::Boolean, ColumnType::Complex,
                    ColumnType::Ambiguous})
    CHECK(column_type_from_string(to_string(type)) == type);
}

TEST_CASE("schema_for keeps known types") {
  const IR ir({"a", "b"}, {Row{CellValue::number(1), t("x")}, Row{CellValue::number(2), t("y")},
                           Row{CellValue::number(3), t("z")}});
  const ColumnSchema known({{"a", ColumnType::String}});
  const ColumnSchema s = schema_for(ir, known);
  CHECK(s.at("a") == ColumnType::String);
  CHECK(s.at("b") == ColumnType::String);
  CHECK(s.entries().front().first == "a");
}

TEST_CASE("property: Missing never influences the type") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const IR ir = flowetl::testing::random_ir(rng, {.max_rows = 30, .max_cols = 4, .missing = 0.0, .duplicate = 0.1,
                                                    .complex = true});
    std::vector<Row> rows = ir.rows();
    // sprinkle Missing rows and cells
    const std::size_t extra = rng() % 6;
    for (std::size_t k = 0; k < extra; ++k) rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(rng() % (rows.size() + 1)),
                                                     Row(ir.column_count(), CellValue::missing()));
    CHECK(infer_schema(IR(ir.headers(), rows)) == infer_schema(ir));
  }
}

TEST_CASE("property: two distinct values, one repeated, always give boolean") {
  std::mt19937_64 rng(22);
  const std::vector<CellValue> pool{t("a"), t("b"), CellValue::number(4), CellValue::number(9), t("[1]"),
                                    CellValue::boolean(true), t("{}"), t("x y")};
  for (int i = 0; i < 300; ++i) {
    const auto& v1 = pool[rng() % pool.size()];
    const auto& v2 = pool[rng() % pool.size()];
    if (serialize_cell(v1) == serialize_cell(v2)) continue;
    std::vector<CellValue> cells{v1, v2, rng() % 2 ? v1 : v2};
    const std::size_t n = rng() % 20;
    for (std::size_t k = 0; k < n; ++k) cells.push_back(rng() % 3 == 0 ? CellValue::missing() : (rng() % 2 ? v1 : v2));
    CHECK(type_of(cells) == ColumnType::Boolean);
  }
}

TEST_CASE("property: mixed types with three or more values give ambiguous") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    std::vector<CellValue> cells;
    const std::size_t n = 3 + rng() % 10;
    for (std::size_t k = 0; k < n; ++k) cells.push_back(CellValue::number(static_cast<double>(k)));
    cells[rng() % n] = rng() % 2 ? t("word") : t("[1,2]");
    CHECK(type_of(cells) == ColumnType::Ambiguous);
  }
}

TEST_CASE("property: row shuffles do not change the schema") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 300; ++i) {
    const IR ir = flowetl::testing::random_ir(rng, {.max_rows = 40, .max_cols = 5, .missing = 0.2, .duplicate = 0.2,
                                                    .complex = true});
    std::vector<Row> rows = ir.rows();
    std::shuffle(rows.begin(), rows.end(), rng);
    CHECK(infer_schema(IR(ir.headers(), rows)) == infer_schema(ir));
  }
}
