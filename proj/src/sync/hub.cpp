#include "findingplaces/sync/hub.hpp"

#include <algorithm>

#include "findingplaces/session/store.hpp"
#include "findingplaces/sync/schema.hpp"

namespace findingplaces::sync {

using nlohmann::json;

EnvelopePtr make_envelope(Topic topic, std::uint64_t seq, std::int64_t ts, json payload) {
  auto env = std::make_shared<Envelope>();
  env->topic = topic;
  env->seq = seq;
  env->ts = ts;
  env->frame = json{{"topic", session::to_string(topic)}, {"seq", seq}, {"ts", ts}, {"payload", payload}}.dump();
  env->payload = std::move(payload);
  return env;
}

Hub::Hub() {
  // Compile the bundled schemas up front so a broken bundle fails at startup.
  for (Topic t : session::kAllTopics) topic_schema(t);
}

std::uint64_t Hub::publish(Topic topic, json payload) {
  if (auto err = topic_schema(topic).validate(payload)) {
    throw PublishError(std::string(session::to_string(topic)) + ": " + *err);
  }
  std::vector<SinkPtr> overflowed;
  std::uint64_t seq;
  {
    Channel& ch = channel(topic);
    std::lock_guard lock(ch.mu);
    seq = ++ch.seq;
    ch.retained = make_envelope(topic, seq, session::now_ms(), std::move(payload));
    for (const auto& sink : ch.sinks) {
      if (!sink->offer(ch.retained)) overflowed.push_back(sink);
    }
  }
  for (const auto& sink : overflowed) drop(sink);
  return seq;
}

void Hub::subscribe(Topic topic, const SinkPtr& sink) {
  bool overflow = false;
  {
    Channel& ch = channel(topic);
    std::lock_guard lock(ch.mu);
    if (std::find(ch.sinks.begin(), ch.sinks.end(), sink) != ch.sinks.end()) return;
    ch.sinks.push_back(sink);
    if (ch.retained) overflow = !sink->offer(ch.retained);
  }
  if (overflow) drop(sink);
}

void Hub::unsubscribe(Topic topic, const Sink* sink) {
  Channel& ch = channel(topic);
  std::lock_guard lock(ch.mu);
  std::erase_if(ch.sinks, [&](const SinkPtr& s) { return s.get() == sink; });
}

void Hub::unsubscribe_all(const Sink* sink) {
  for (Topic t : session::kAllTopics) unsubscribe(t, sink);
}

void Hub::drop(const SinkPtr& sink) {
  bool present = false;
  for (Topic t : session::kAllTopics) {
    Channel& ch = channel(t);
    std::lock_guard lock(ch.mu);
    present |= std::erase_if(ch.sinks, [&](const SinkPtr& s) { return s == sink; }) > 0;
  }
  if (present) {
    ++dropped_;
    sink->dropped();
  }
}

EnvelopePtr Hub::snapshot(Topic topic) const {
  const Channel& ch = channel(topic);
  std::lock_guard lock(ch.mu);
  return ch.retained;
}

std::uint64_t Hub::seq(Topic topic) const {
  const Channel& ch = channel(topic);
  std::lock_guard lock(ch.mu);
  return ch.seq;
}

std::size_t Hub::subscriber_count(Topic topic) const {
  const Channel& ch = channel(topic);
  std::lock_guard lock(ch.mu);
  return ch.sinks.size();
}

std::size_t Hub::total_subscribers() const {
  std::size_t n = 0;
  for (Topic t : session::kAllTopics) n += subscriber_count(t);
  return n;
}

bool QueueSink::offer(const EnvelopePtr& env) {
  {
    std::lock_guard lock(mu_);
    if (queue_.size() >= limit_) return false;
    queue_.push_back(env);
  }
  cv_.notify_one();
  return true;
}

void QueueSink::dropped() {
  {
    std::lock_guard lock(mu_);
    dropped_ = true;
  }
  cv_.notify_all();
}

EnvelopePtr QueueSink::pop(int timeout_ms) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return !queue_.empty(); });
  if (queue_.empty()) return nullptr;
  auto env = queue_.front();
  queue_.pop_front();
  return env;
}

std::size_t QueueSink::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

bool QueueSink::was_dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

}  // namespace findingplaces::sync
