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

#include "flowetl/bus.hpp"

#include "flowetl/errors.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace flowetl {

std::vector<std::string> standard_topics() {
  return {std::string(kSourceArtifactsTopic), std::string(kTargetArtifactsTopic), std::string(kPlansTopic),
          std::string(kMetricsTopic)};
}

std::uint64_t Topic::append(std::string payload) {
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  std::uint64_t offset;
  {
    std::lock_guard lock(mu_);
    offset = log_.size();
    log_.push_back({offset, std::move(payload), now});
  }
  cv_.notify_all();
  return offset;
}

std::uint64_t Topic::size() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::optional<Message> Topic::at(std::uint64_t offset) const {
  std::lock_guard lock(mu_);
  if (offset >= log_.size()) return std::nullopt;
  return log_[offset];
}

std::optional<Message> Topic::wait_at(std::uint64_t offset, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return offset < log_.size(); })) return std::nullopt;
  return log_[offset];
}

std::vector<Message> Topic::snapshot() const {
  std::lock_guard lock(mu_);
  return log_;
}

Topic& Bus::topic(std::string_view name) {
  std::lock_guard lock(mu_);
  auto it = topics_.find(name);
  if (it == topics_.end()) it = topics_.emplace(std::string(name), std::make_unique<Topic>(std::string(name))).first;
  return *it->second;
}

std::uint64_t Bus::publish(std::string_view name, std::string payload) {
  if (payload.size() > max_payload_)
    throw BusError("payload too large: " + std::to_string(payload.size()) + " bytes on topic '" + std::string(name) +
                   "' (limit " + std::to_string(max_payload_) + ")");
  return topic(name).append(std::move(payload));
}

ConsumerCursor Bus::subscribe(std::string_view name, std::uint64_t from) {
  topic(name);
  return {std::string(name), from};
}

std::optional<Message> Bus::consume(ConsumerCursor& cursor) {
  auto msg = topic(cursor.topic).at(cursor.next);
  if (msg) ++cursor.next;
  return msg;
}

std::optional<Message> Bus::wait_consume(ConsumerCursor& cursor, std::chrono::milliseconds timeout) {
  auto msg = topic(cursor.topic).wait_at(cursor.next, timeout);
  if (msg) ++cursor.next;
  return msg;
}

std::uint64_t Bus::size(std::string_view name) { return topic(name).size(); }

std::vector<std::string> Bus::topics() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : topics_) out.push_back(name);
  return out;
}

std::vector<Message> Bus::snapshot(std::string_view name) { return topic(name).snapshot(); }

void Bus::persist(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<const Topic*> all;
  {
    std::lock_guard lock(mu_);
    for (const auto& [_, t] : topics_) all.push_back(t.get());
  }
  for (const Topic* t : all) {
    std::ofstream out(std::filesystem::path(dir) / (t->name() + ".ndjson"), std::ios::binary);
    if (!out) throw BusError("cannot write log for topic '" + t->name() + "'");
    for (const auto& m : t->snapshot()) {
      nlohmann::ordered_json line{{"offset", m.offset}, {"timestamp_ms", m.timestamp_ms}, {"payload", m.payload}};
      out << line.dump() << '\n';
    }
  }
}

}  // namespace flowetl
