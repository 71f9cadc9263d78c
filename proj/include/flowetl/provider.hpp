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

#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace flowetl {

/// Collects non-fatal warnings raised while planning or executing.
class Diagnostics {
 public:
  void warn(std::string message) {
    std::lock_guard lock(mu_);
    warnings_.push_back(std::move(message));
  }
  std::vector<std::string> warnings() const {
    std::lock_guard lock(mu_);
    return warnings_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> warnings_;
};

struct ProviderCall {
  std::string endpoint;
  bool ok = false;
  std::string error;
  double elapsed_ms = 0.0;
};

struct ProviderResult {
  bool ok = false;
  nlohmann::ordered_json body;
  std::string error;
};

/// A remote service answering "match" and "infer" requests. Every call is
/// recorded in the call log; transport problems are reported as a failed
/// result, never thrown.
class Provider {
 public:
  virtual ~Provider() = default;

  ProviderResult request(std::string_view endpoint, const nlohmann::ordered_json& body);
  std::vector<ProviderCall> calls() const;

 protected:
  virtual ProviderResult do_request(std::string_view endpoint, const nlohmann::ordered_json& body) = 0;

 private:
  mutable std::mutex mu_;
  std::vector<ProviderCall> calls_;
};

struct ProviderConfig {
  std::string url;  // e.g. http://127.0.0.1:8080
  std::string key;
  int timeout_ms = 30000;

  /// FLOWETL_PROVIDER_URL, FLOWETL_PROVIDER_KEY, FLOWETL_PROVIDER_TIMEOUT_MS.
  static ProviderConfig from_env();
};

/// JSON over HTTP POST to <url>/<endpoint> with a bearer key.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config) : config_(std::move(config)) {}

 protected:
  ProviderResult do_request(std::string_view endpoint, const nlohmann::ordered_json& body) override;

 private:
  ProviderConfig config_;
};

}  // namespace flowetl
