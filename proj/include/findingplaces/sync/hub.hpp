#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/session/session.hpp"

namespace findingplaces::sync {

using session::Topic;

struct Envelope {
  Topic topic;
  std::uint64_t seq = 0;
  std::int64_t ts = 0;  // ms since epoch
  nlohmann::json payload;
  /// Wire form, serialized once and shared by every subscriber.
  std::string frame;
};
using EnvelopePtr = std::shared_ptr<const Envelope>;

EnvelopePtr make_envelope(Topic topic, std::uint64_t seq, std::int64_t ts, nlohmann::json payload);

/// Receives envelopes from the hub. offer() must not block; returning false
/// means the subscriber fell behind and the hub drops it.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual bool offer(const EnvelopePtr& env) = 0;
  /// Called once after the hub dropped this sink for overflow.
  virtual void dropped() {}
};
using SinkPtr = std::shared_ptr<Sink>;

class PublishError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Topic-based fan-out with per-topic sequence numbers and retained
/// last-value snapshots. Publishes to one topic are serialized by that
/// topic's lock; different topics proceed independently.
class Hub {
 public:
  Hub();

  /// Validates, assigns the next seq, retains and delivers. Throws
  /// PublishError on schema violations, leaving the topic untouched.
  std::uint64_t publish(Topic topic, nlohmann::json payload);

  /// The retained snapshot, if any, is offered before anything newer.
  void subscribe(Topic topic, const SinkPtr& sink);
  void unsubscribe(Topic topic, const Sink* sink);
  void unsubscribe_all(const Sink* sink);

  EnvelopePtr snapshot(Topic topic) const;
  std::uint64_t seq(Topic topic) const;
  std::size_t subscriber_count(Topic topic) const;
  std::size_t total_subscribers() const;
  std::uint64_t dropped_count() const { return dropped_.load(); }

 private:
  struct Channel {
    mutable std::mutex mu;
    std::uint64_t seq = 0;
    EnvelopePtr retained;
    std::vector<SinkPtr> sinks;
  };
  Channel& channel(Topic t) { return channels_[static_cast<std::size_t>(t)]; }
  const Channel& channel(Topic t) const { return channels_[static_cast<std::size_t>(t)]; }
  void drop(const SinkPtr& sink);

  std::array<Channel, 5> channels_;
  std::atomic<std::uint64_t> dropped_{0};
};

/// In-process subscriber with a bounded queue, used by tests and tools.
class QueueSink : public Sink {
 public:
  explicit QueueSink(std::size_t limit = 1000) : limit_(limit) {}
  bool offer(const EnvelopePtr& env) override;
  void dropped() override;
  /// Waits up to `timeout_ms` for the next envelope.
  EnvelopePtr pop(int timeout_ms);
  std::size_t size() const;
  bool was_dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<EnvelopePtr> queue_;
  std::size_t limit_;
  bool dropped_ = false;
};

}  // namespace findingplaces::sync
