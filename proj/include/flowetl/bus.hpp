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

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowetl {

inline constexpr std::size_t kDefaultMaxPayload = std::size_t{64} << 20;

inline constexpr std::string_view kSourceArtifactsTopic = "source-artifacts";
inline constexpr std::string_view kTargetArtifactsTopic = "target-artifacts";
inline constexpr std::string_view kPlansTopic = "plans";
inline constexpr std::string_view kMetricsTopic = "metrics";

/// source-artifacts, target-artifacts, plans, metrics.
std::vector<std::string> standard_topics();

struct Message {
  std::uint64_t offset = 0;
  std::string payload;
  std::int64_t timestamp_ms = 0;  // wall clock, milliseconds since the epoch
};

/// Position of one consumer in one topic.
struct ConsumerCursor {
  std::string topic;
  std::uint64_t next = 0;

  void reset(std::uint64_t offset = 0) noexcept { next = offset; }
};

/// Append-only single-partition log.
class Topic {
 public:
  explicit Topic(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  std::uint64_t append(std::string payload);
  std::uint64_t size() const;
  std::optional<Message> at(std::uint64_t offset) const;
  /// Blocks until `offset` exists or the timeout passes.
  std::optional<Message> wait_at(std::uint64_t offset, std::chrono::milliseconds timeout) const;
  std::vector<Message> snapshot() const;

 private:
  std::string name_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<Message> log_;
};

/// In-process publish/subscribe over named topics. Topics are created on
/// first use; all operations are safe to call from any thread.
class Bus {
 public:
  explicit Bus(std::size_t max_payload = kDefaultMaxPayload) : max_payload_(max_payload) {}

  /// Returns the offset of the new message. Throws BusError "payload too
  /// large" above the configured limit.
  std::uint64_t publish(std::string_view topic, std::string payload);

  ConsumerCursor subscribe(std::string_view topic, std::uint64_t from = 0);
  /// Message at the cursor, advancing it, or nothing at the head.
  std::optional<Message> consume(ConsumerCursor& cursor);
  std::optional<Message> wait_consume(ConsumerCursor& cursor, std::chrono::milliseconds timeout);

  std::uint64_t size(std::string_view topic);
  std::vector<std::string> topics() const;
  std::vector<Message> snapshot(std::string_view topic);

  /// Writes <dir>/<topic>.ndjson with one {"offset","timestamp_ms","payload"} line per message.
  void persist(const std::string& dir) const;

 private:
  Topic& topic(std::string_view name);

  std::size_t max_payload_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Topic>, std::less<>> topics_;
};

}  // namespace flowetl
