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

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace flowetl {

/// One canned reply. `body` is sent verbatim, so malformed JSON is possible.
struct ScriptedResponse {
  int status = 200;
  std::string body;
  int delay_ms = 0;

  static ScriptedResponse json(const nlohmann::ordered_json& body, int status = 200);
  static ScriptedResponse raw(std::string text, int status = 200);
  static ScriptedResponse delayed(ScriptedResponse response, int delay_ms);
};

/// Replies consumed in order, whatever the endpoint.
struct ProviderScript {
  std::vector<ScriptedResponse> responses;
};

/// [{"status": 200, "body": {...} | "raw text", "delay_ms": 0}, ...]
ProviderScript script_from_json(const nlohmann::ordered_json& json);

struct StubRequest {
  std::string endpoint;  // match | infer | anything else that was posted
  std::string body;
  std::string authorization;
};

/// Local HTTP double for the provider protocol. Answers POST /match and
/// POST /infer from the script on a background thread; other paths get 404
/// without consuming a reply. Once the last reply is sent the listener
/// closes, so later connections are refused.
class ProviderStub {
 public:
  /// port 0 picks a free port.
  explicit ProviderStub(ProviderScript script, int port = 0, std::string host = "127.0.0.1");
  ~ProviderStub();

  ProviderStub(const ProviderStub&) = delete;
  ProviderStub& operator=(const ProviderStub&) = delete;

  int port() const noexcept { return port_; }
  std::string url() const;

  std::vector<StubRequest> requests() const;
  std::size_t remaining() const;
  bool exhausted() const;

  /// Blocks until the listener has closed.
  void wait();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::string host_;
  int port_ = 0;
  std::thread thread_;

  mutable std::mutex mu_;
  std::deque<ScriptedResponse> script_;
  std::vector<StubRequest> log_;
};

}  // namespace flowetl
