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

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace flowetl {

/// Column types of the FlowETL type system.
enum class ColumnType { Number, String, Boolean, Complex, Ambiguous };

std::string_view to_string(ColumnType type);
/// Throws ContractViolation on an unknown name.
ColumnType column_type_from_string(std::string_view name);

struct Missing {
  friend bool operator==(const Missing&, const Missing&) = default;
};

/// A nested list or map. The wrapped JSON is kept canonical: object keys are
/// sorted and integral floats are stored as integers, so equal values always
/// dump to the same text.
class ComplexValue {
 public:
  explicit ComplexValue(const nlohmann::json& value);
  explicit ComplexValue(const nlohmann::ordered_json& value);

  const nlohmann::json& json() const noexcept { return value_; }
  std::string canonical_text() const { return value_.dump(); }

  friend bool operator==(const ComplexValue& a, const ComplexValue& b) { return a.value_ == b.value_; }

 private:
  nlohmann::json value_;
};

/// One IR cell: Missing, Number, Text, Bool or Complex.
class CellValue {
 public:
  CellValue() = default;  // Missing

  static CellValue missing() { return {}; }
  static CellValue number(double v) { return CellValue(Storage(std::in_place_index<1>, v)); }
  static CellValue text(std::string v) { return CellValue(Storage(std::in_place_index<2>, std::move(v))); }
  static CellValue boolean(bool v) { return CellValue(Storage(std::in_place_index<3>, v)); }
  static CellValue complex(ComplexValue v) { return CellValue(Storage(std::in_place_index<4>, std::move(v))); }

  bool is_missing() const noexcept { return value_.index() == 0; }
  bool is_number() const noexcept { return value_.index() == 1; }
  bool is_text() const noexcept { return value_.index() == 2; }
  bool is_bool() const noexcept { return value_.index() == 3; }
  bool is_complex() const noexcept { return value_.index() == 4; }

  double as_number() const { return std::get<1>(value_); }
  const std::string& as_text() const { return std::get<2>(value_); }
  bool as_bool() const { return std::get<3>(value_); }
  const ComplexValue& as_complex() const { return std::get<4>(value_); }

  /// Numeric view: Number cells, or Text that parses as a finite float.
  std::optional<double> numeric() const;

  friend bool operator==(const CellValue& a, const CellValue& b) { return a.value_ == b.value_; }

 private:
  using Storage = std::variant<Missing, double, std::string, bool, ComplexValue>;
  explicit CellValue(Storage s) : value_(std::move(s)) {}
  Storage value_;
};

/// Strict float parse: the whole string must be consumed and the value finite.
std::optional<double> parse_number(std::string_view text);

/// Integral values below 1e15 print without a fractional part; everything
/// else uses the shortest representation that parses back exactly.
std::string format_number(double value);

/// Plain rendering used for CSV fields and string concatenation. Missing
/// renders as the empty string.
std::string display_text(const CellValue& cell);

/// Type-tagged canonical text. Injective up to numeric equality and stable
/// across runs. Missing maps to kMissingSentinel.
std::string serialize_cell(const CellValue& cell);

inline constexpr std::string_view kMissingSentinel = "\x1f<missing>";

/// Type of a single non-missing cell. Text is classified by content: float
/// parsable → number, JSON array/object → complex, else string.
/// Throws ContractViolation for Missing.
ColumnType infer_cell_type(const CellValue& cell);

/// Interprets a raw text field (CSV) as a cell: number, true/false, JSON
/// array/object, otherwise text.
CellValue cell_from_field(std::string_view field);

/// Cell <-> JSON value. Missing is null; arrays and objects are Complex.
CellValue cell_from_json(const nlohmann::ordered_json& value);
nlohmann::ordered_json cell_to_json(const CellValue& cell);

/// Loose comparison used when checking produced values against examples:
/// numbers compare with a 1e-9 relative tolerance, everything else by
/// display text.
bool cells_match(const CellValue& produced, const CellValue& expected);

}  // namespace flowetl
