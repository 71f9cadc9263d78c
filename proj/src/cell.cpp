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

#include "flowetl/cell.hpp"

#include "flowetl/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>

namespace flowetl {

namespace {

template <class Json>
nlohmann::json canonicalize(const Json& in) {
  switch (in.type()) {
    case nlohmann::json::value_t::object: {
      nlohmann::json out = nlohmann::json::object();
      for (auto it = in.begin(); it != in.end(); ++it) out[it.key()] = canonicalize(it.value());
      return out;
    }
    case nlohmann::json::value_t::array: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& v : in) out.push_back(canonicalize(v));
      return out;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = in.template get<double>();
      if (std::isfinite(d) && std::trunc(d) == d && std::fabs(d) < 9.0e15)
        return nlohmann::json(static_cast<std::int64_t>(d));
      return nlohmann::json(d);
    }
    case nlohmann::json::value_t::number_unsigned: {
      const auto u = in.template get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        return nlohmann::json(static_cast<std::int64_t>(u));
      return nlohmann::json(u);
    }
    case nlohmann::json::value_t::number_integer:
      return nlohmann::json(in.template get<std::int64_t>());
    case nlohmann::json::value_t::string:
      return nlohmann::json(in.template get<std::string>());
    case nlohmann::json::value_t::boolean:
      return nlohmann::json(in.template get<bool>());
    default:
      return nullptr;
  }
}

bool looks_like_container(std::string_view s) {
  return !s.empty() && (s.front() == '[' || s.front() == '{');
}

std::optional<nlohmann::ordered_json> parse_container(std::string_view s) {
  if (!looks_like_container(s)) return std::nullopt;
  auto parsed = nlohmann::ordered_json::parse(s.begin(), s.end(), nullptr, false);
  if (parsed.is_discarded() || !(parsed.is_array() || parsed.is_object())) return std::nullopt;
  return parsed;
}

}  // namespace

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Number: return "number";
    case ColumnType::String: return "string";
    case ColumnType::Boolean: return "boolean";
    case ColumnType::Complex: return "complex";
    case ColumnType::Ambiguous: return "ambiguous";
  }
  return "string";
}

ColumnType column_type_from_string(std::string_view name) {
  if (name == "number") return ColumnType::Number;
  if (name == "string") return ColumnType::String;
  if (name == "boolean") return ColumnType::Boolean;
  if (name == "complex") return ColumnType::Complex;
  if (name == "ambiguous") return ColumnType::Ambiguous;
  throw ContractViolation("unknown column type '" + std::string(name) + "'");
}

ComplexValue::ComplexValue(const nlohmann::json& value) : value_(canonicalize(value)) {}
ComplexValue::ComplexValue(const nlohmann::ordered_json& value) : value_(canonicalize(value)) {}

std::optional<double> CellValue::numeric() const {
  if (is_number()) return as_number();
  if (is_text()) return parse_number(as_text());
  return std::nullopt;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::trunc(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string display_text(const CellValue& cell) {
  if (cell.is_missing()) return {};
  if (cell.is_number()) return format_number(cell.as_number());
  if (cell.is_text()) return cell.as_text();
  if (cell.is_bool()) return cell.as_bool() ? "true" : "false";
  return cell.as_complex().canonical_text();
}

std::string serialize_cell(const CellValue& cell) {
  if (cell.is_missing()) return std::string(kMissingSentinel);
  if (cell.is_number()) return "n:" + format_number(cell.as_number());
  if (cell.is_text()) return "s:" + cell.as_text();
  if (cell.is_bool()) return cell.as_bool() ? "b:true" : "b:false";
  return "c:" + cell.as_complex().canonical_text();
}

ColumnType infer_cell_type(const CellValue& cell) {
  if (cell.is_missing()) throw ContractViolation("infer_cell_type called on a Missing cell");
  if (cell.is_number()) return ColumnType::Number;
  if (cell.is_bool()) return ColumnType::Boolean;
  if (cell.is_complex()) return ColumnType::Complex;
  const std::string& s = cell.as_text();
  if (parse_number(s)) return ColumnType::Number;
  if (parse_container(s)) return ColumnType::Complex;
  return ColumnType::String;
}

CellValue cell_from_field(std::string_view field) {
  if (field.empty()) return CellValue::missing();
  if (auto n = parse_number(field)) return CellValue::number(*n);
  if (field == "true") return CellValue::boolean(true);
  if (field == "false") return CellValue::boolean(false);
  if (auto c = parse_container(field)) return CellValue::complex(ComplexValue(*c));
  return CellValue::text(std::string(field));
}

CellValue cell_from_json(const nlohmann::ordered_json& value) {
  switch (value.type()) {
    case nlohmann::ordered_json::value_t::null:
    case nlohmann::ordered_json::value_t::discarded:
      return CellValue::missing();
    case nlohmann::ordered_json::value_t::boolean:
      return CellValue::boolean(value.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
    case nlohmann::ordered_json::value_t::number_unsigned:
    case nlohmann::ordered_json::value_t::number_float:
      return CellValue::number(value.get<double>());
    case nlohmann::ordered_json::value_t::string:
      return CellValue::text(value.get<std::string>());
    default:
      return CellValue::complex(ComplexValue(value));
  }
}

nlohmann::ordered_json cell_to_json(const CellValue& cell) {
  if (cell.is_missing()) return nullptr;
  if (cell.is_bool()) return cell.as_bool();
  if (cell.is_text()) return cell.as_text();
  if (cell.is_number()) {
    const double d = cell.as_number();
    if (std::trunc(d) == d && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    return d;
  }
  return nlohmann::ordered_json::parse(cell.as_complex().canonical_text());
}

bool cells_match(const CellValue& produced, const CellValue& expected) {
  if (produced.is_missing() || expected.is_missing()) return produced.is_missing() && expected.is_missing();
  const auto a = produced.numeric();
  const auto b = expected.numeric();
  if (a && b) {
    const double scale = std::max({1.0, std::fabs(*a), std::fabs(*b)});
    return std::fabs(*a - *b) <= 1e-9 * scale;
  }
  return display_text(produced) == display_text(expected);
}

}  // namespace flowetl
