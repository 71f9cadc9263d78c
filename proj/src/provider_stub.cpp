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

#include "flowetl/provider_stub.hpp"

#include "flowetl/errors.hpp"

#include <httplib.h>

#include <chrono>

namespace flowetl {

ScriptedResponse ScriptedResponse::json(const nlohmann::ordered_json& body, int status) {
  return {status, body.dump(), 0};
}

ScriptedResponse ScriptedResponse::raw(std::string text, int status) { return {status, std::move(text), 0}; }

ScriptedResponse ScriptedResponse::delayed(ScriptedResponse response, int delay_ms) {
  response.delay_ms = delay_ms;
  return response;
}

ProviderScript script_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_array()) throw ContractViolation("provider script must be a JSON array");
  ProviderScript script;
  for (const auto& entry : json) {
    if (!entry.is_object() || !entry.contains("body"))
      throw ContractViolation("script entries need a body");
    ScriptedResponse r;
    r.status = entry.value("status", 200);
    r.delay_ms = entry.value("delay_ms", 0);
    const auto& body = entry["body"];
    r.body = body.is_string() ? body.get<std::string>() : body.dump();
    script.responses.push_back(std::move(r));
  }
  return script;
}

ProviderStub::ProviderStub(ProviderScript script, int port, std::string host)
    : server_(std::make_unique<httplib::Server>()),
      host_(std::move(host)),
      script_(script.responses.begin(), script.responses.end()) {
  server_->new_task_queue = [] { return new httplib::ThreadPool(1); };

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ScriptedResponse reply;
    bool last = false;
    {
      std::lock_guard lock(mu_);
      log_.push_back({req.path.substr(1), req.body, req.get_header_value("Authorization")});
      if (script_.empty()) {
        res.status = 503;
        return;
      }
      reply = std::move(script_.front());
      script_.pop_front();
      last = script_.empty();
    }
    if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
    res.set_header("Connection", "close");
    if (last) server_->stop();
  };
  server_->Post("/match", handler);
  server_->Post("/infer", handler);

  if (port == 0) {
    port_ = server_->bind_to_any_port(host_);
  } else {
    port_ = server_->bind_to_port(host_, port) ? port : -1;
  }
  if (port_ <= 0) throw ContractViolation("provider stub could not bind to " + host_ + ":" + std::to_string(port));
  const bool empty = script_.empty();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  if (empty) server_->stop();
}

ProviderStub::~ProviderStub() {
  stop();
  wait();
}

std::string ProviderStub::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

std::vector<StubRequest> ProviderStub::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ProviderStub::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size();
}

bool ProviderStub::exhausted() const { return remaining() == 0; }

void ProviderStub::wait() {
  if (thread_.joinable()) thread_.join();
}

void ProviderStub::stop() { server_->stop(); }

}  // namespace flowetl
