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

#include "flowetl/evalkit.hpp"

#include "flowetl/errors.hpp"
#include "flowetl/inference.hpp"
#include "flowetl/quality.hpp"
#include "flowetl/schema.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace flowetl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
  }

 private:
  std::mt19937_64 gen_;
};

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

// ---------------------------------------------------------------- polluter

IR pollute(const IR& ir, const PollutionSpec& spec, Diagnostics* diagnostics) {
  if (ir.empty() || ir.column_count() == 0) throw ContractViolation("cannot pollute an empty IR");
  for (double v : {spec.missing, spec.duplicates, spec.outliers, spec.numeric_missing_share})
    if (!(v >= 0.0 && v < 1.0)) throw ContractViolation("pollution targets must lie in [0, 1)");

  Rng rng(spec.seed);
  const std::size_t n = ir.row_count();
  const std::size_t c = ir.column_count();
  const ColumnSchema schema = infer_schema(ir);
  std::vector<Row> rows = ir.rows();
  std::vector<std::vector<bool>> outlier(n, std::vector<bool>(c, false));

  std::vector<std::size_t> numeric;
  for (std::size_t col = 0; col < c; ++col)
    if (schema.at(ir.headers()[col]) == ColumnType::Number) numeric.push_back(col);

  // outliers
  const auto outlier_budget = static_cast<std::size_t>(std::llround(spec.outliers * static_cast<double>(n * c)));
  if (outlier_budget > 0) {
    struct Slot {
      std::size_t col;
      MadBounds bounds;
      bool integral;
      std::vector<std::size_t> order;
      std::size_t used = 0;
      std::size_t capacity;
    };
    std::vector<Slot> slots;
    for (std::size_t col : numeric) {
      const auto bounds = column_bounds(ir, col);
      if (!bounds || bounds->t_max <= bounds->median) continue;
      bool integral = true;
      std::vector<std::size_t> order;
      for (std::size_t r = 0; r < n; ++r) {
        if (!rows[r][col].is_number()) continue;
        order.push_back(r);
        integral = integral && std::floor(rows[r][col].as_number()) == rows[r][col].as_number();
      }
      rng.shuffle(order);
      const std::size_t capacity = std::min(order.size(), n / 4);
      slots.push_back({col, *bounds, integral, std::move(order), 0, capacity});
    }
    std::size_t placed = 0;
    bool progress = true;
    while (placed < outlier_budget && progress) {
      progress = false;
      for (auto& s : slots) {
        if (placed == outlier_budget) break;
        if (s.used >= s.capacity) continue;
        const std::size_t r = s.order[s.used];
        const double half = s.bounds.t_max - s.bounds.median;
        const double sign = s.used % 2 == 0 ? 1.0 : -1.0;
        double v = s.bounds.median + sign * half * (3.0 + 3.0 * rng.unit());
        if (s.integral) v = std::round(v);
        rows[r][s.col] = CellValue::number(v);
        outlier[r][s.col] = true;
        ++s.used;
        ++placed;
        progress = true;
      }
    }
    if (placed < outlier_budget && diagnostics)
      diagnostics->warn("only " + std::to_string(placed) + " of " + std::to_string(outlier_budget) +
                        " outliers could be placed");
  }

  // blanks
  std::vector<std::vector<std::size_t>> free_cells(c);
  std::size_t existing = 0;
  for (std::size_t col = 0; col < c; ++col) {
    for (std::size_t r = 0; r < n; ++r) {
      if (rows[r][col].is_missing()) ++existing;
      else if (!outlier[r][col]) free_cells[col].push_back(r);
    }
    rng.shuffle(free_cells[col]);
  }
  const auto missing_budget = static_cast<std::size_t>(std::llround(spec.missing * static_cast<double>(n * c)));
  std::size_t to_blank = missing_budget > existing ? missing_budget - existing : 0;
  std::vector<std::size_t> quota(c, 0);
  const std::set<std::size_t> numeric_set(numeric.begin(), numeric.end());
  for (std::size_t col : numeric) {
    const auto q = std::min(free_cells[col].size(),
                            static_cast<std::size_t>(std::floor(spec.numeric_missing_share * static_cast<double>(n))));
    quota[col] = std::min(q, to_blank);
    to_blank -= quota[col];
  }
  // spread the rest evenly over non-number columns, then over anything left
  for (bool numeric_pass : {false, true}) {
    while (to_blank > 0) {
      std::vector<std::size_t> open;
      for (std::size_t col = 0; col < c; ++col)
        if (numeric_set.count(col) == static_cast<std::size_t>(numeric_pass) && quota[col] < free_cells[col].size())
          open.push_back(col);
      if (open.empty()) break;
      const std::size_t share = std::max<std::size_t>(1, to_blank / open.size());
      for (std::size_t col : open) {
        const std::size_t add = std::min({share, free_cells[col].size() - quota[col], to_blank});
        quota[col] += add;
        to_blank -= add;
        if (to_blank == 0) break;
      }
    }
  }
  for (std::size_t col = 0; col < c; ++col)
    for (std::size_t i = 0; i < quota[col]; ++i) rows[free_cells[col][i]][col] = CellValue::missing();

  // duplicates, steering the missing and outlier shares toward their targets
  const auto dups = static_cast<std::size_t>(
      std::llround(spec.duplicates * static_cast<double>(n) / (1.0 - spec.duplicates)));
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
  double missing_total = 0.0, outlier_total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t m = 0, o = 0;
    for (std::size_t col = 0; col < c; ++col) {
      m += rows[r][col].is_missing();
      o += outlier[r][col];
    }
    missing_total += static_cast<double>(m);
    outlier_total += static_cast<double>(o);
    groups[{m, o}].push_back(r);
  }
  double cells = static_cast<double>(n * c);
  for (std::size_t k = 0; k < dups; ++k) {
    const std::vector<std::size_t>* best = nullptr;
    double best_err = 0.0;
    std::pair<std::size_t, std::size_t> best_sig;
    for (const auto& [sig, members] : groups) {
      const double after = cells + static_cast<double>(c);
      const double em = (missing_total + static_cast<double>(sig.first)) / after - spec.missing;
      const double eo = (outlier_total + static_cast<double>(sig.second)) / after - spec.outliers;
      const double err = em * em + eo * eo;
      if (!best || err < best_err) {
        best = &members;
        best_err = err;
        best_sig = sig;
      }
    }
    const std::size_t r = (*best)[static_cast<std::size_t>(rng.below(best->size()))];
    rows.push_back(rows[r]);
    missing_total += static_cast<double>(best_sig.first);
    outlier_total += static_cast<double>(best_sig.second);
    cells += static_cast<double>(c);
  }
  rng.shuffle(rows);
  if (numeric.empty() && spec.outliers > 0.0 && diagnostics)
    diagnostics->warn("no number columns; outliers skipped");
  return IR(ir.headers(), std::move(rows));
}

// ---------------------------------------------------------------- PlanEval

bool params_equal(const ojson& a, const ojson& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    return std::fabs(x - y) <= 1e-9 * std::max({1.0, std::fabs(x), std::fabs(y)});
  }
  if (a.type() != b.type()) return false;
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!params_equal(a[i], b[i])) return false;
    return true;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!b.contains(it.key()) || !params_equal(it.value(), b[it.key()])) return false;
    return true;
  }
  return a == b;
}

namespace {

bool same_identity(const PlanOp& a, const PlanOp& b) {
  auto ta = a.targets, tb = b.targets;
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  return a.kind == b.kind && a.type == b.type && ta == tb;
}

}  // namespace

PlanEvalScore plan_eval(const std::vector<PlanOp>& plan, const GroundTruthPlan& gt) {
  if (gt.ops.empty()) throw ContractViolation("PlanEval needs a non-empty ground truth");
  PlanEvalScore score;
  score.max_s = static_cast<double>(gt.ops.size());
  std::vector<bool> credited(gt.ops.size(), false);
  for (const auto& op : plan) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < gt.ops.size() && !hit; ++i)
      if (!credited[i] && same_identity(op, gt.ops[i])) hit = i;
    if (!hit) {
      ++score.hallucinated;
      continue;
    }
    credited[*hit] = true;
    if (params_equal(op.params, gt.ops[*hit].params)) {
      score.s += 1.0;
      ++score.correct;
    } else {
      score.s += 0.5;
      ++score.partial;
    }
  }
  score.value = score.s / score.max_s;
  return score;
}

std::vector<PlanOp> plan_ops(const SchemaMap& map, const TransformationProgram& program) {
  std::vector<PlanOp> ops;
  for (const auto& c : map.correspondences) {
    auto sources = c.sources;
    std::sort(sources.begin(), sources.end());
    ops.push_back({"match", "map", {c.target}, ojson{{"sources", sources}}});
  }
  for (const auto& e : program.entries) {
    const std::string kind = expr_kind(e.expr);
    if (kind == "identity") continue;
    ops.push_back({"transform", kind, {e.target}, expr_to_json(e.expr)});
  }
  return ops;
}

std::vector<PlanOp> plan_ops(const PlanPayload& payload) { return plan_ops(payload.schema_map, payload.logic); }

ojson op_to_json(const PlanOp& op) {
  return {{"kind", op.kind}, {"type", op.type}, {"targets", op.targets}, {"params", op.params}};
}

PlanOp op_from_json(const ojson& json) {
  try {
    return {json.at("kind").get<std::string>(), json.at("type").get<std::string>(),
            json.at("targets").get<std::vector<std::string>>(), json.value("params", ojson())};
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("malformed plan operation: ") + e.what());
  }
}

ojson gt_to_json(const GroundTruthPlan& gt) {
  ojson ops = ojson::array();
  for (const auto& op : gt.ops) ops.push_back(op_to_json(op));
  return {{"ops", std::move(ops)}};
}

GroundTruthPlan gt_from_json(const ojson& json) {
  if (!json.is_object() || !json.contains("ops") || !json["ops"].is_array())
    throw ContractViolation("ground truth must hold an \"ops\" array");
  GroundTruthPlan gt;
  for (const auto& op : json["ops"]) gt.ops.push_back(op_from_json(op));
  return gt;
}

// ---------------------------------------------------------------- corpus

namespace {

enum class Gen { Id, Choice, Real, Int, Bool, Date, Code };

struct ColumnGen {
  std::string name;
  Gen gen = Gen::Id;
  double lo = 0, hi = 0;
  int decimals = 0;
  const std::vector<std::string>* vocab = nullptr;
  std::string prefix, suffix;
};

struct Domain {
  std::string name;
  FileFormat format;
  std::vector<std::string> key;
  std::size_t rows;
  std::vector<ColumnGen> columns;
  std::vector<ProgramEntry> targets;
};

const std::vector<std::string> kFirst = {"James", "Mary",  "John",   "Patricia", "Robert", "Jennifer", "Michael",
                                         "Linda", "David", "Maria",  "William",  "Susan",  "Richard",  "Karen",
                                         "Joseph", "Nancy", "Thomas", "Lisa",    "Carlos", "Aisha"};
const std::vector<std::string> kLast = {"Smith",  "Johnson", "Williams", "Brown",  "Jones",  "Garcia", "Miller",
                                        "Davis",  "Rodriguez", "Martinez", "Lopez", "Wilson", "Anderson", "Taylor",
                                        "Thomas", "Moore",   "Jackson",  "Martin", "Lee",    "Okafor"};
const std::vector<std::string> kCities = {"London", "Paris",  "Berlin", "Madrid", "Rome",   "Vienna", "Dublin",
                                          "Lisbon", "Prague", "Warsaw", "Oslo",   "Athens", "Zurich", "Brussels"};
const std::vector<std::string> kDepts = {"sales", "finance", "engineering", "support", "marketing", "legal", "hr"};
const std::vector<std::string> kCategories = {"Electronics", "Garden", "Toys", "Books", "Kitchen", "Sports",
                                              "Beauty"};
const std::vector<std::string> kProducts = {"laptop", "phone",  "tablet", "monitor", "keyboard", "mouse",
                                            "router", "camera", "printer", "speaker", "charger", "headset"};
const std::vector<std::string> kCurrencies = {"USD", "EUR", "GBP", "JPY", "CHF"};
const std::vector<std::string> kMajors = {"physics", "history", "biology", "economics", "mathematics", "art",
                                          "chemistry"};
const std::vector<std::string> kTickers = {"ACME", "GLOBX", "INITECH", "UMBRL", "WAYNE", "STARK", "TYRELL"};
const std::vector<std::string> kExchanges = {"NYSE", "NASDAQ", "LSE", "XETRA"};
const std::vector<std::string> kWarehouses = {"north", "south", "east", "west", "central"};
const std::vector<std::string> kTitles = {"Desk Lamp", "Water Bottle", "Backpack", "Notebook", "Sneakers",
                                          "Coffee Mug", "Yoga Mat", "Headphones", "Umbrella", "Wall Clock"};

ColumnGen make_gen(std::string name, Gen gen, double lo = 0, double hi = 0, int decimals = 0) {
  ColumnGen g;
  g.name = std::move(name);
  g.gen = gen;
  g.lo = lo;
  g.hi = hi;
  g.decimals = decimals;
  return g;
}

ColumnGen id(std::string name) { return make_gen(std::move(name), Gen::Id); }
ColumnGen choice(std::string name, const std::vector<std::string>& vocab) {
  ColumnGen g = make_gen(std::move(name), Gen::Choice);
  g.vocab = &vocab;
  return g;
}
ColumnGen real(std::string name, double lo, double hi, int decimals) {
  return make_gen(std::move(name), Gen::Real, lo, hi, decimals);
}
ColumnGen integer(std::string name, double lo, double hi) { return make_gen(std::move(name), Gen::Int, lo, hi); }
ColumnGen boolean(std::string name) { return make_gen(std::move(name), Gen::Bool); }
ColumnGen date(std::string name, int from_year, int to_year) {
  return make_gen(std::move(name), Gen::Date, from_year, to_year);
}
ColumnGen code(std::string name, std::string prefix, std::string suffix = {}) {
  ColumnGen g = make_gen(std::move(name), Gen::Code);
  g.prefix = std::move(prefix);
  g.suffix = std::move(suffix);
  return g;
}

Expr col(const char* name) { return Expr::col(name); }

std::vector<Domain> domains() {
  using E = Expr;
  return {
      {"customers", FileFormat::Csv, {}, 30,
       {id("customer_id"), choice("first_name", kFirst), choice("last_name", kLast),
        code("email", "user", "@example.com"), integer("age", 18, 90), real("balance", 0, 5000, 2),
        date("signup_date", 2015, 2024)},
       {{"id", col("customer_id")},
        {"full_name", E::concat({col("first_name"), col("last_name")}, " ")},
        {"email", col("email")},
        {"age", col("age")},
        {"balance", col("balance")},
        {"signup_date", col("signup_date")}}},
      {"orders", FileFormat::Csv, {}, 120,
       {id("order_id"), choice("customer", kLast), choice("product", kProducts), integer("qty", 1, 60),
        real("unit_price", 1, 500, 2), date("order_date", 2020, 2024)},
       {{"order_id", col("order_id")},
        {"customer", col("customer")},
        {"product", col("product")},
        {"quantity", col("qty")},
        {"price_cents", make_affine("unit_price", 100, 0)},
        {"order_date", col("order_date")}}},
      {"sensors", FileFormat::Json, {"data", "readings"}, 500,
       {id("reading_id"), code("sensor", "S-"), real("temp_c", -10, 40, 1), real("humidity", 10, 90, 1),
        date("recorded", 2022, 2024)},
       {{"reading_id", col("reading_id")},
        {"sensor", col("sensor")},
        {"temp_f", make_affine("temp_c", 1.8, 32)},
        {"humidity", col("humidity")},
        {"recorded", col("recorded")}}},
      {"employees", FileFormat::Csv, {}, 1000,
       {id("emp_id"), choice("fname", kFirst), choice("lname", kLast), choice("dept", kDepts),
        integer("salary", 30000, 150000), date("hired", 2000, 2024)},
       {{"employee_id", col("emp_id")},
        {"first_name", col("fname")},
        {"last_name", col("lname")},
        {"department", E::format(col("dept"), "{:upper}")},
        {"salary", col("salary")},
        {"hired", col("hired")}}},
      {"products", FileFormat::Json, {"catalog"}, 2500,
       {code("sku", "SKU-"), choice("title", kTitles), choice("category", kCategories), real("price", 2, 900, 2),
        integer("stock", 0, 1000), boolean("active"), id("product_id")},
       {{"product_id", col("product_id")},
        {"product_code", col("sku")},
        {"title", col("title")},
        {"category", E::format(col("category"), "{:lower}")},
        {"price", col("price")},
        {"stock", col("stock")},
        {"active", col("active")}}},
      {"flights", FileFormat::Csv, {}, 5000,
       {id("flight_id"), code("flight_no", "FL"), choice("origin", kCities), choice("destination", kCities),
        integer("distance_km", 200, 9000), integer("duration_min", 30, 900), date("departure", 2023, 2024)},
       {{"flight_id", col("flight_id")},
        {"flight_number", col("flight_no")},
        {"origin", col("origin")},
        {"destination", col("destination")},
        {"distance_miles", make_affine("distance_km", 0.621371, 0)},
        {"duration_min", col("duration_min")},
        {"departure", col("departure")}}},
      {"stock", FileFormat::Csv, {}, 7557,
       {id("trade_id"), choice("ticker", kTickers), choice("exchange", kExchanges), date("date", 1998, 2024),
        real("open", 100, 200, 2), real("high", 100, 200, 2),
        real("low", 100, 200, 2), real("close", 100, 200, 2), integer("volume", 100000, 10000000)},
       {{"TradeId", col("trade_id")},
        {"Ticker", col("ticker")},
        {"Exchange", col("exchange")},
        {"Date", col("date")},
        {"Open", col("open")},
        {"High", col("high")},
        {"Low", col("low")},
        {"Close", col("close")},
        {"Volume", col("volume")}}},
      {"students", FileFormat::Json, {}, 10000,
       {id("student_id"), choice("first_name", kFirst), choice("last_name", kLast), integer("grade", 0, 100),
        choice("major", kMajors), boolean("enrolled")},
       {{"student_id", col("student_id")},
        {"full_name", E::concat({col("first_name"), col("last_name")}, " ")},
        {"grade", col("grade")},
        {"major", E::format(col("major"), "{:upper}")},
        {"enrolled", col("enrolled")}}},
      {"weather", FileFormat::Csv, {}, 20000,
       {id("station_id"), choice("city", kCities), real("temp", -20, 40, 1), real("humid", 5, 100, 1),
        real("wind_kmh", 0, 120, 1), date("observed", 2010, 2024)},
       {{"station_id", col("station_id")},
        {"city", col("city")},
        {"temperature", col("temp")},
        {"humidity", col("humid")},
        {"wind_kmh", col("wind_kmh")},
        {"observed", col("observed")}}},
      {"transactions", FileFormat::Json, {"result", "transactions"}, 50000,
       {id("txn_id"), code("acct", "AC"), real("amt", 1, 5000, 2), choice("currency", kCurrencies),
        integer("items", 1, 40), date("txn_date", 2021, 2024)},
       {{"txn_id", col("txn_id")},
        {"account", col("acct")},
        {"amount", col("amt")},
        {"currency", E::format(col("currency"), "{:lower}")},
        {"items", col("items")},
        {"txn_date", col("txn_date")}}},
      {"inventory", FileFormat::Csv, {}, 200,
       {id("item_id"), choice("item", kProducts), choice("warehouse", kWarehouses), real("wt", 0.5, 50, 2),
        integer("qty", 0, 500)},
       {{"item_id", col("item_id")},
        {"product", col("item")},
        {"warehouse", col("warehouse")},
        {"weight_lbs", make_affine("wt", 2.20462, 0)},
        {"quantity", col("qty")}}},
      {"patients", FileFormat::Json, {"patients"}, 800,
       {id("patient_id"), choice("first_name", kFirst), choice("last_name", kLast), date("dob", 1940, 2010),
        real("height_cm", 140, 200, 1), real("weight_kg", 40, 120, 1)},
       {{"patient_id", col("patient_id")},
        {"first_name", col("first_name")},
        {"last_name", col("last_name")},
        {"birth_date", col("dob")},
        {"height_cm", col("height_cm")},
        {"weight_kg", col("weight_kg")}}},
  };
}

CellValue generate(const ColumnGen& g, std::size_t row, Rng& rng) {
  switch (g.gen) {
    case Gen::Id: return CellValue::number(static_cast<double>(row + 1));
    case Gen::Choice: return CellValue::text((*g.vocab)[static_cast<std::size_t>(rng.below(g.vocab->size()))]);
    case Gen::Real: return CellValue::number(round_to(rng.uniform(g.lo, g.hi), g.decimals));
    case Gen::Int:
      return CellValue::number(g.lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(g.hi - g.lo + 1))));
    case Gen::Bool: return CellValue::boolean(rng.below(2) == 1);
    case Gen::Date: {
      char buf[16];
      const auto years = static_cast<std::uint64_t>(g.hi - g.lo + 1);
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(g.lo + static_cast<double>(rng.below(years))),
                    static_cast<int>(1 + rng.below(12)), static_cast<int>(1 + rng.below(28)));
      return CellValue::text(buf);
    }
    case Gen::Code: {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%05d", static_cast<int>(rng.below(100000)));
      return CellValue::text(g.prefix + buf + g.suffix);
    }
  }
  return CellValue::missing();
}

void ordered_columns(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColNode>) {
          if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
        } else if constexpr (std::is_same_v<T, ConcatNode>) {
          for (const auto& p : n.parts) ordered_columns(p, out);
        } else if constexpr (std::is_same_v<T, std::shared_ptr<const ArithNode>>) {
          ordered_columns(n->left, out);
          ordered_columns(n->right, out);
        } else if constexpr (std::is_same_v<T, std::shared_ptr<const FormatNode>> ||
                             std::is_same_v<T, std::shared_ptr<const SplitNode>>) {
          ordered_columns(n->arg, out);
        } else if constexpr (std::is_same_v<T, std::shared_ptr<const MapLookupNode>>) {
          ordered_columns(n->arg, out);
          ordered_columns(n->fallback, out);
        }
      },
      e.node());
}

const std::vector<std::size_t>& default_sizes() {
  static const std::vector<std::size_t> sizes = {30, 120, 500, 1000, 2500, 5000, 7557, 10000, 20000, 50000, 200, 800};
  return sizes;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::vector<CorpusPair> generate_corpus(const CorpusSpec& spec) {
  const auto& sizes = spec.sizes.empty() ? default_sizes() : spec.sizes;
  std::vector<CorpusPair> corpus;
  const auto all = domains();
  for (std::size_t d = 0; d < all.size(); ++d) {
    const Domain& dom = all[d];
    Rng rng(spec.seed * 1000003ULL + d);
    const std::size_t n = sizes[d % sizes.size()];

    std::vector<std::string> headers;
    for (const auto& g : dom.columns) headers.push_back(g.name);
    std::vector<Row> rows(n);
    for (std::size_t r = 0; r < n; ++r)
      for (const auto& g : dom.columns) rows[r].push_back(generate(g, r, rng));

    CorpusPair pair;
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu_", d + 1);
    pair.name = prefix + dom.name;
    pair.format = dom.format;
    pair.key.path = dom.key;
    pair.clean = IR(headers, std::move(rows));

    for (const auto& t : dom.targets) {
      std::vector<std::string> sources;
      ordered_columns(t.expr, sources);
      pair.map.correspondences.push_back({sources, t.target});
      pair.program.entries.push_back(t);
    }
    complete_unmapped(pair.map, infer_schema(pair.clean), [&] {
      ColumnSchema s;
      for (const auto& t : dom.targets) s.set(t.target, ColumnType::String);
      return s;
    }());
    pair.gt.ops = plan_ops(pair.map, pair.program);

    pair.target_source_rows = sample_indices(n, std::min(spec.target_rows, n), spec.seed * 7919ULL + d);
    IR picked(pair.clean.headers());
    for (std::size_t r : pair.target_source_rows) picked.add_row(pair.clean.rows()[r]);
    pair.target = apply_transform_program(picked, pair.program, pair.map).ir;

    PollutionSpec pollution = spec.pollution;
    pollution.seed = spec.pollution.seed + spec.seed * 31ULL + d;
    pair.polluted = pollute(pair.clean, pollution);
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

void write_corpus(const std::vector<CorpusPair>& corpus, const std::string& dir) {
  for (const auto& pair : corpus) {
    const fs::path base = fs::path(dir) / pair.name;
    fs::create_directories(base);
    const std::string ext = pair.format == FileFormat::Json ? ".json" : ".csv";
    write_file((base / ("source" + ext)).string(), pair.polluted, pair.key, pair.format);
    write_file((base / ("clean" + ext)).string(), pair.clean, pair.key, pair.format);
    write_file((base / ("target" + ext)).string(), pair.target, {}, pair.format);
    ojson gt = gt_to_json(pair.gt);
    gt["schema_map"] = schema_map_to_json(pair.map);
    gt["program"] = program_to_json(pair.program);
    gt["target_source_rows"] = pair.target_source_rows;
    write_text(base / "gt.json", gt.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------- benchmark

std::vector<BenchmarkRow> benchmark(const std::string& corpus_dir, const std::string& out_dir,
                                    const BenchmarkConfig& config) {
  if (!fs::is_directory(corpus_dir)) throw Error("corpus directory '" + corpus_dir + "' does not exist");
  std::vector<fs::path> pairs;
  for (const auto& entry : fs::directory_iterator(corpus_dir))
    if (entry.is_directory()) pairs.push_back(entry.path());
  std::sort(pairs.begin(), pairs.end());

  std::vector<BenchmarkRow> results;
  for (const auto& dir : pairs) {
    BenchmarkRow row;
    row.dataset = dir.filename().string();
    try {
      std::string source, target;
      for (const char* ext : {".csv", ".json"}) {
        if (fs::exists(dir / (std::string("source") + ext))) source = (dir / (std::string("source") + ext)).string();
        if (fs::exists(dir / (std::string("target") + ext))) target = (dir / (std::string("target") + ext)).string();
      }
      if (source.empty() || target.empty()) throw Error("pair lacks a source or target file");
      const GroundTruthPlan gt = gt_from_json(ojson::parse(read_file(dir / "gt.json")));

      PipelineConfig pc;
      pc.source = source;
      pc.target = target;
      pc.out_dir = (fs::path(out_dir) / "runs" / row.dataset).string();
      pc.seed = config.seed;
      pc.sampling = config.sampling;
      pc.mode = config.mode;
      pc.workers = config.workers;
      const auto start = std::chrono::steady_clock::now();
      const PipelineResult run = run_pipeline(pc);
      row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      const auto& comps = run.report.json["components"];
      if (comps.contains(std::string(kWorker)) && comps[std::string(kWorker)]["status"] == "ok") {
        const auto& c = comps[std::string(kWorker)]["contents"];
        row.entries = c["rows_in"].get<std::size_t>();
        row.pre_dqs = c["pre_dqs"]["dqs"].get<double>();
        row.dqs = c["post_dqs"]["dqs"].get<double>();
        row.missing_pct = 100.0 * c["post_dqs"]["missing_ratio"].get<double>();
        row.duplicate_pct = 100.0 * c["post_dqs"]["duplicate_ratio"].get<double>();
        row.outlier_pct = 100.0 * c["post_dqs"]["outlier_ratio"].get<double>();
        row.plan = c["plan"].get<std::string>();
      }
      const fs::path plan_path = fs::path(pc.out_dir) / "plan.json";
      if (fs::exists(plan_path))
        row.plan_eval = plan_eval(plan_ops(payload_from_json(ojson::parse(read_file(plan_path)))), gt).value;
      row.ok = run.exit_code == 0;
      if (!row.ok) {
        const auto& errors = run.report.json["errors"];
        row.error = errors.empty() ? "pipeline failed" : errors.front().get<std::string>();
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    results.push_back(std::move(row));
  }

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "results.csv", benchmark_csv(results));
  write_text(fs::path(out_dir) / "results.md", benchmark_markdown(results));
  ojson details = ojson::array();
  for (const auto& r : results)
    details.push_back({{"dataset", r.dataset},
                       {"ok", r.ok},
                       {"error", r.error},
                       {"entries", r.entries},
                       {"time_s", r.time_s},
                       {"pre_dqs", r.pre_dqs},
                       {"dqs", r.dqs},
                       {"missing_pct", r.missing_pct},
                       {"duplicate_pct", r.duplicate_pct},
                       {"outlier_pct", r.outlier_pct},
                       {"plan_eval", r.plan_eval},
                       {"plan", r.plan}});
  write_text(fs::path(out_dir) / "results.json", details.dump(2) + "\n");
  return results;
}

namespace {

const std::vector<std::string> kTableHeaders = {"Dataset",           "Time (s)",           "DQS",
                                                "Missing Values %",  "Duplicate Rows %",   "Outlier Values %",
                                                "PlanEval Score"};

std::vector<std::string> cells_of(const BenchmarkRow& r) {
  auto f = [](double v, int d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", d, v);
    return std::string(buf);
  };
  if (!r.ok && r.entries == 0) return {r.dataset, f(r.time_s, 2), "failed", "", "", "", f(r.plan_eval, 3)};
  return {r.dataset,           f(r.time_s, 2),        f(r.dqs, 4),          f(r.missing_pct, 2),
          f(r.duplicate_pct, 2), f(r.outlier_pct, 2), f(r.plan_eval, 3)};
}

}  // namespace

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::vector<std::string> headers = kTableHeaders;
  std::vector<Row> cells;
  for (const auto& r : rows) {
    Row row;
    for (auto& c : cells_of(r)) row.push_back(CellValue::text(std::move(c)));
    cells.push_back(std::move(row));
  }
  return ir_to_csv(IR(std::move(headers), std::move(cells)));
}

std::string benchmark_markdown(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "|";
  for (const auto& h : kTableHeaders) out << " " << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < kTableHeaders.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << "\n";
  for (const auto& r : rows) {
    out << "|";
    for (const auto& c : cells_of(r)) out << " " << c << " |";
    out << "\n";
  }
  bool any_error = false;
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    if (!any_error) out << "\nFailures:\n\n";
    any_error = true;
    out << "- " << r.dataset << ": " << r.error << "\n";
  }
  return out.str();
}

}  // namespace flowetl
