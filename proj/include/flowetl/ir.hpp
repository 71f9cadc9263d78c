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

#include "flowetl/cell.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowetl {

using Row = std::vector<CellValue>;

/// Tabular view over CSV and JSON content: unique, non-empty headers and
/// rows holding exactly one cell per header. The constructor enforces both.
class InternalRepresentation {
 public:
  InternalRepresentation() = default;
  explicit InternalRepresentation(std::vector<std::string> headers, std::vector<Row> rows = {});

  const std::vector<std::string>& headers() const noexcept { return headers_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t column_count() const noexcept { return headers_.size(); }
  std::size_t cell_count() const noexcept { return rows_.size() * headers_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  std::optional<std::size_t> column_index(std::string_view name) const;
  /// Throws ContractViolation when the column does not exist.
  std::vector<CellValue> column(std::string_view name) const;

  /// Throws ContractViolation on a length mismatch.
  void add_row(Row row);

  friend bool operator==(const InternalRepresentation&, const InternalRepresentation&) = default;

 private:
  std::vector<std::string> headers_;
  std::vector<Row> rows_;
};

using IR = InternalRepresentation;

/// Object-key path from the JSON root to the record array. Empty for CSV
/// sources and root-level arrays.
struct ReconstructionKey {
  std::vector<std::string> path;

  bool empty() const noexcept { return path.empty(); }
  friend bool operator==(const ReconstructionKey&, const ReconstructionKey&) = default;
};

enum class FileFormat { Csv, Json };

/// RFC-4180 CSV with a mandatory header row. Unquoted and quoted fields are
/// typed with cell_from_field, except that an empty unquoted field is Missing
/// and `""` is empty text. Errors carry the line where the record starts.
IR csv_to_ir(std::string_view bytes);

/// Header line plus one line per row. Fields are quoted when they contain
/// separators or when their text would otherwise be read back as a
/// different cell.
std::string ir_to_csv(const IR& ir);

/// Depth-first search for the first array; its elements must be objects.
/// Headers are the union of keys in first-seen order, absent keys are
/// Missing.
std::pair<IR, ReconstructionKey> json_to_ir(std::string_view bytes);

/// One object per row, Missing cells omitted, nested back under the key path.
std::string ir_to_json(const IR& ir, const ReconstructionKey& key, int indent = -1);

/// Picks the format from the file extension (.json → JSON, otherwise CSV).
FileFormat format_for_path(std::string_view path);

struct LoadedFile {
  IR ir;
  ReconstructionKey key;
  FileFormat format = FileFormat::Csv;
  std::size_t size_bytes = 0;
};

/// Reads and translates a file. Throws TranslationError, or Error when the
/// file cannot be read.
LoadedFile load_file(const std::string& path);
void write_file(const std::string& path, const IR& ir, const ReconstructionKey& key, FileFormat format);

/// Wire encoding used inside bus payloads: {"headers": [...], "rows": [[...]]}
/// with cells encoded by cell_to_json.
nlohmann::ordered_json ir_to_wire(const IR& ir);
IR ir_from_wire(const nlohmann::ordered_json& wire);

}  // namespace flowetl
