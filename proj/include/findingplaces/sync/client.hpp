#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace findingplaces::sync {

/// Blocking WebSocket client speaking the hub protocol. A background thread
/// reads frames into a queue so receive() can time out.
class Client {
 public:
  /// Throws std::runtime_error when the connection fails.
  Client(const std::string& host, std::uint16_t port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(const nlohmann::json& frame);
  /// Next frame, or nullopt after `timeout_ms` or once the connection closed.
  std::optional<nlohmann::json> receive(int timeout_ms);
  /// Receive arrival time in steady-clock nanoseconds, for latency probes.
  std::optional<std::pair<nlohmann::json, std::int64_t>> receive_timed(int timeout_ms);
  bool closed() const;
  void close();

  void subscribe(const std::string& topic);
  void publish(const std::string& topic, const nlohmann::json& payload, const std::string& token);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::int64_t steady_ns();

}  // namespace findingplaces::sync
