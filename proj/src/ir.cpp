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

#include "flowetl/ir.hpp"

#include "flowetl/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace flowetl {

InternalRepresentation::InternalRepresentation(std::vector<std::string> headers, std::vector<Row> rows)
    : headers_(std::move(headers)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& h : headers_) {
    if (h.empty()) throw ContractViolation("empty header name");
    if (!seen.insert(h).second) throw ContractViolation("duplicate header '" + h + "'");
  }
  rows_.reserve(rows.size());
  for (auto& r : rows) add_row(std::move(r));
}

std::optional<std::size_t> InternalRepresentation::column_index(std::string_view name) const {
  auto it = std::find(headers_.begin(), headers_.end(), name);
  if (it == headers_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - headers_.begin());
}

std::vector<CellValue> InternalRepresentation::column(std::string_view name) const {
  const auto idx = column_index(name);
  if (!idx) throw ContractViolation("unknown column '" + std::string(name) + "'");
  std::vector<CellValue> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[*idx]);
  return out;
}

void InternalRepresentation::add_row(Row row) {
  if (row.size() != headers_.size()) {
    throw ContractViolation("row has " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(headers_.size()));
  }
  rows_.push_back(std::move(row));
}

// ---------------------------------------------------------------- CSV

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

struct Record {
  std::vector<Field> fields;
  std::size_t line = 0;
};

std::vector<Record> split_csv(std::string_view in) {
  if (in.size() >= 3 && in.substr(0, 3) == "\xEF\xBB\xBF") in.remove_prefix(3);

  std::vector<Record> records;
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = in.size();
  while (i < n) {
    Record rec;
    rec.line = line;
    bool end_of_record = false;
    while (!end_of_record) {
      Field f;
      if (i < n && in[i] == '"') {
        f.quoted = true;
        const std::size_t open_line = line;
        ++i;
        bool closed = false;
        while (i < n) {
          const char c = in[i];
          if (c == '"') {
            if (i + 1 < n && in[i + 1] == '"') {
              f.text.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          f.text.push_back(c);
          ++i;
        }
        if (!closed) throw TranslationError("unbalanced quote", open_line);
        if (i < n && in[i] != ',' && in[i] != '\n' && in[i] != '\r') {
          throw TranslationError("unexpected character after closing quote", line);
        }
      } else {
        while (i < n && in[i] != ',' && in[i] != '\n' && in[i] != '\r') f.text.push_back(in[i++]);
      }
      rec.fields.push_back(std::move(f));
      if (i >= n) {
        end_of_record = true;
      } else if (in[i] == ',') {
        ++i;
      } else {
        if (in[i] == '\r') ++i;
        if (i < n && in[i] == '\n') ++i;
        ++line;
        end_of_record = true;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

bool needs_quotes(const CellValue& cell, const std::string& text) {
  if (cell.is_complex()) return true;
  if (text.find_first_of(",\"\r\n") != std::string::npos) return true;
  if (cell.is_text()) return !(cell_from_field(text) == cell);
  return false;
}

void append_field(std::string& out, const std::string& text, bool quote) {
  if (!quote) {
    out += text;
    return;
  }
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

IR csv_to_ir(std::string_view bytes) {
  auto records = split_csv(bytes);
  if (records.empty()) throw TranslationError("missing header row", 1);

  std::vector<std::string> headers;
  std::unordered_set<std::string> seen;
  for (auto& f : records.front().fields) {
    if (f.text.empty()) throw TranslationError("empty column name", records.front().line);
    if (!seen.insert(f.text).second) throw TranslationError("duplicate column '" + f.text + "'", records.front().line);
    headers.push_back(std::move(f.text));
  }

  IR ir(headers);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    const bool blank = rec.fields.size() == 1 && rec.fields[0].text.empty() && !rec.fields[0].quoted;
    if (blank && headers.size() > 1) continue;
    if (rec.fields.size() != headers.size()) {
      throw TranslationError("expected " + std::to_string(headers.size()) + " fields, found " +
                                 std::to_string(rec.fields.size()),
                             rec.line);
    }
    Row row;
    row.reserve(headers.size());
    for (auto& f : rec.fields) {
      if (f.quoted && f.text.empty()) {
        row.push_back(CellValue::text(""));
      } else {
        row.push_back(cell_from_field(f.text));
      }
    }
    ir.add_row(std::move(row));
  }
  return ir;
}

std::string ir_to_csv(const IR& ir) {
  std::string out;
  for (std::size_t c = 0; c < ir.column_count(); ++c) {
    if (c) out.push_back(',');
    const auto& h = ir.headers()[c];
    append_field(out, h, h.find_first_of(",\"\r\n") != std::string::npos);
  }
  out.push_back('\n');
  for (const auto& row : ir.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      const auto& cell = row[c];
      if (cell.is_missing()) continue;
      const std::string text = display_text(cell);
      append_field(out, text, needs_quotes(cell, text));
    }
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------- JSON

namespace {

using ojson = nlohmann::ordered_json;

const ojson* find_record_array(const ojson& node, std::vector<std::string>& path) {
  if (node.is_array()) return &node;
  if (!node.is_object()) return nullptr;
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!it.value().is_structured()) continue;
    path.push_back(it.key());
    if (const ojson* found = find_record_array(it.value(), path)) return found;
    path.pop_back();
  }
  return nullptr;
}

}  // namespace

std::pair<IR, ReconstructionKey> json_to_ir(std::string_view bytes) {
  ojson doc;
  try {
    doc = ojson::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw TranslationError(std::string("invalid JSON: ") + e.what());
  }

  ReconstructionKey key;
  const ojson* records = find_record_array(doc, key.path);
  if (!records) throw TranslationError("no array of records found in JSON document");

  std::vector<std::string> headers;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records->size(); ++i) {
    const auto& obj = (*records)[i];
    if (!obj.is_object()) {
      throw TranslationError("record " + std::to_string(i) + " is not an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it.key().empty()) throw TranslationError("record " + std::to_string(i) + " has an empty key");
      if (index.emplace(it.key(), headers.size()).second) headers.push_back(it.key());
    }
  }

  std::vector<Row> rows;
  rows.reserve(records->size());
  for (const auto& obj : *records) {
    Row row(headers.size());
    for (auto it = obj.begin(); it != obj.end(); ++it) row[index.at(it.key())] = cell_from_json(it.value());
    rows.push_back(std::move(row));
  }
  return {IR(std::move(headers), std::move(rows)), std::move(key)};
}

std::string ir_to_json(const IR& ir, const ReconstructionKey& key, int indent) {
  ojson records = ojson::array();
  for (const auto& row : ir.rows()) {
    ojson obj = ojson::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].is_missing()) continue;
      obj[ir.headers()[c]] = cell_to_json(row[c]);
    }
    records.push_back(std::move(obj));
  }
  ojson doc = std::move(records);
  for (auto it = key.path.rbegin(); it != key.path.rend(); ++it) {
    ojson wrapper = ojson::object();
    wrapper[*it] = std::move(doc);
    doc = std::move(wrapper);
  }
  return doc.dump(indent);
}

// ---------------------------------------------------------------- files

FileFormat format_for_path(std::string_view path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".json" ? FileFormat::Json : FileFormat::Csv;
}

LoadedFile load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();

  LoadedFile out;
  out.size_bytes = bytes.size();
  out.format = format_for_path(path);
  if (out.format == FileFormat::Json) {
    auto [ir, key] = json_to_ir(bytes);
    out.ir = std::move(ir);
    out.key = std::move(key);
  } else {
    out.ir = csv_to_ir(bytes);
  }
  return out;
}

void write_file(const std::string& path, const IR& ir, const ReconstructionKey& key, FileFormat format) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << (format == FileFormat::Json ? ir_to_json(ir, key, 2) + "\n" : ir_to_csv(ir));
}

// ---------------------------------------------------------------- wire

nlohmann::ordered_json ir_to_wire(const IR& ir) {
  ojson rows = ojson::array();
  for (const auto& row : ir.rows()) {
    ojson r = ojson::array();
    for (const auto& cell : row) r.push_back(cell_to_json(cell));
    rows.push_back(std::move(r));
  }
  return ojson{{"headers", ir.headers()}, {"rows", std::move(rows)}};
}

IR ir_from_wire(const nlohmann::ordered_json& wire) {
  try {
    std::vector<std::string> headers = wire.at("headers").get<std::vector<std::string>>();
    std::vector<Row> rows;
    for (const auto& r : wire.at("rows")) {
      Row row;
      for (const auto& c : r) row.push_back(cell_from_json(c));
      rows.push_back(std::move(row));
    }
    return IR(std::move(headers), std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw TranslationError(std::string("malformed IR payload: ") + e.what());
  } catch (const ContractViolation& e) {
    throw TranslationError(std::string("malformed IR payload: ") + e.what());
  }
}

}  // namespace flowetl
