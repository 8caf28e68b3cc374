#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "findingplaces/sync/hub.hpp"

namespace findingplaces::sync {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  std::uint16_t port = 0;
  /// Required on publish and command frames.
  std::string token;
  /// Outbound envelopes a client may have pending before it is dropped.
  std::size_t queue_limit = 1000;
  int threads = 2;
};

/// Handles {"op":"command"} frames; returns the reply sent to that client.
using CommandHandler = std::function<nlohmann::json(const nlohmann::json& command)>;

/// WebSocket front end of a Hub. Frames are one JSON object each:
///   client -> hub  {"op":"subscribe","topic":t}
///                  {"op":"unsubscribe","topic":t}
///                  {"op":"publish","topic":t,"payload":{...},"token":s}
///                  {"op":"command","command":{...},"token":s}
///   hub -> client  {"topic":t,"seq":n,"ts":ms,"payload":{...}}
///                  {"error":"..."}
///                  {"ok":true,"op":...} acknowledging publish, command,
///                  subscribe and unsubscribe
class Server {
 public:
  /// Binds immediately; throws std::runtime_error when the endpoint is taken.
  Server(Hub& hub, ServerOptions opt, CommandHandler on_command = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Starts the worker threads and returns.
  void start();
  /// Closes the listener and every connection, then joins the workers.
  void stop();
  std::size_t connection_count() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace findingplaces::sync
