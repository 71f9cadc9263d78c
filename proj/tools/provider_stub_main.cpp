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
#include "flowetl/provider_stub.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Scripted provider test double (POST /match, POST /infer)"};
  std::string script_path, log_path;
  int port = 0;
  app.add_option("--script", script_path, "JSON array of scripted replies")->required()->check(CLI::ExistingFile);
  app.add_option("--port", port, "Port, 0 for any free port");
  app.add_option("--log", log_path, "Write received requests here as NDJSON on exit");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(script_path);
    const auto script = flowetl::script_from_json(nlohmann::ordered_json::parse(in));
    flowetl::ProviderStub stub(script, port);
    std::cout << stub.url() << std::endl;
    stub.wait();
    if (!log_path.empty()) {
      std::ofstream out(log_path);
      for (const auto& r : stub.requests())
        out << nlohmann::ordered_json{{"endpoint", r.endpoint}, {"body", r.body}}.dump() << "\n";
    }
    std::cerr << stub.requests().size() << " requests served\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
