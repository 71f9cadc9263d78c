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

#include "flowetl/provider.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>

namespace flowetl {

ProviderResult Provider::request(std::string_view endpoint, const nlohmann::ordered_json& body) {
  const auto start = std::chrono::steady_clock::now();
  ProviderResult result = do_request(endpoint, body);
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
  std::lock_guard lock(mu_);
  calls_.push_back({std::string(endpoint), result.ok, result.error, elapsed.count()});
  return result;
}

std::vector<ProviderCall> Provider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig config;
  if (const char* url = std::getenv("FLOWETL_PROVIDER_URL")) config.url = url;
  if (const char* key = std::getenv("FLOWETL_PROVIDER_KEY")) config.key = key;
  if (const char* timeout = std::getenv("FLOWETL_PROVIDER_TIMEOUT_MS")) {
    try {
      config.timeout_ms = std::stoi(timeout);
    } catch (const std::exception&) {
      // keep the default
    }
  }
  return config;
}

ProviderResult HttpProvider::do_request(std::string_view endpoint, const nlohmann::ordered_json& body) {
  if (config_.url.empty()) return {false, {}, "provider URL is not configured"};

  httplib::Client client(config_.url);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.key.empty()) headers.emplace("Authorization", "Bearer " + config_.key);

  const std::string path = "/" + std::string(endpoint);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) return {false, {}, "transport error: " + httplib::to_string(res.error())};
  if (res->status != 200) return {false, {}, "HTTP status " + std::to_string(res->status)};

  auto parsed = nlohmann::ordered_json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) return {false, {}, "response is not valid JSON"};
  return {true, std::move(parsed), {}};
}

}  // namespace flowetl
