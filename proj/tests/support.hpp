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
#include "flowetl/ir.hpp"
#include "flowetl/provider.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace flowetl::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("flowetl_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// In-process provider replaying canned results; an empty queue fails the call.
class ScriptedProvider final : public flowetl::Provider {
 public:
  void push(flowetl::ProviderResult r) { queue_.push_back(std::move(r)); }
  void push_body(nlohmann::ordered_json body) { queue_.push_back({true, std::move(body), {}}); }
  void push_error(std::string error) { queue_.push_back({false, {}, std::move(error)}); }
  std::vector<nlohmann::ordered_json> requests;

 protected:
  flowetl::ProviderResult do_request(std::string_view, const nlohmann::ordered_json& body) override {
    requests.push_back(body);
    if (queue_.empty()) return {false, {}, "no scripted reply"};
    auto r = std::move(queue_.front());
    queue_.pop_front();
    return r;
  }

 private:
  std::deque<flowetl::ProviderResult> queue_;
};

struct RandomIrOptions {
  std::size_t max_rows = 40;
  std::size_t max_cols = 5;
  double missing = 0.15;
  double duplicate = 0.2;
  bool complex = false;
};

/// Mixed-type IR with repeated rows, Missing cells and a few numeric spikes.
inline IR random_ir(std::mt19937_64& rng, const RandomIrOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> rows_d(0, opt.max_rows), cols_d(1, opt.max_cols);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t cols = cols_d(rng);
  const std::size_t rows = rows_d(rng);
  std::vector<std::string> headers;
  std::vector<int> kinds;
  for (std::size_t c = 0; c < cols; ++c) {
    headers.push_back("c" + std::to_string(c));
    kinds.push_back(static_cast<int>(rng() % (opt.complex ? 4 : 3)));
  }
  std::vector<Row> out;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!out.empty() && unit(rng) < opt.duplicate) {
      out.push_back(out[rng() % out.size()]);
      continue;
    }
    Row row;
    for (std::size_t c = 0; c < cols; ++c) {
      if (unit(rng) < opt.missing) {
        row.push_back(CellValue::missing());
        continue;
      }
      switch (kinds[c]) {
        case 0: {
          double v = std::round(unit(rng) * 100.0);
          if (unit(rng) < 0.05) v *= 50.0;
          row.push_back(CellValue::number(v));
          break;
        }
        case 1:
          row.push_back(CellValue::text(std::string(1, static_cast<char>('a' + rng() % 6))));
          break;
        case 2:
          row.push_back(CellValue::boolean(rng() % 2 == 0));
          break;
        default:
          row.push_back(CellValue::complex(ComplexValue(nlohmann::json::array({rng() % 3, "x"}))));
      }
    }
    out.push_back(std::move(row));
  }
  return IR(headers, std::move(out));
}

}  // namespace flowetl::testing
