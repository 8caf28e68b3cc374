#include "findingplaces/sync/server.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace findingplaces::sync {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

class Connection;

struct Server::Impl {
  Impl(Hub& h, ServerOptions o, CommandHandler c)
      : hub(h), opt(std::move(o)), on_command(std::move(c)), acceptor(ioc) {}

  void accept();

  Hub& hub;
  ServerOptions opt;
  CommandHandler on_command;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::uint16_t port = 0;
  std::vector<std::thread> workers;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  mutable std::mutex mu;
  std::map<std::uint64_t, std::weak_ptr<Connection>> connections;
  std::uint64_t next_id = 1;
  std::atomic<bool> stopping{false};
};

class Connection : public Sink, public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Server::Impl& server, std::uint64_t id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  bool offer(const EnvelopePtr& env) override {
    if (closed_.load()) return true;  // cleanup is already underway
    if (pending_.fetch_add(1) + 1 > server_.opt.queue_limit) {
      pending_.fetch_sub(1);
      return false;
    }
    net::post(ws_.get_executor(), [self = shared_from_this(), env] {
      self->enqueue(std::shared_ptr<const std::string>(env, &env->frame), true);
    });
    return true;
  }

  void dropped() override {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->shutdown();
    });
  }

  void shutdown() {
    if (closed_.exchange(true)) return;
    server_.hub.unsubscribe_all(this);
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
    forget();
  }

  /// Thread-safe close request.
  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->shutdown(); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return shutdown();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return shutdown();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle(text);
    if (!closed_.load()) read();
  }

  void reply(const json& j) { enqueue(std::make_shared<const std::string>(j.dump()), false); }
  void error(const std::string& message) { reply(json{{"error", message}}); }

  void handle(const std::string& text) {
    json frame;
    try {
      frame = json::parse(text);
    } catch (const json::parse_error& e) {
      return error(std::string("malformed frame: ") + e.what());
    }
    if (!frame.is_object() || !frame.contains("op") || !frame["op"].is_string()) {
      return error("malformed frame: expected an object with a string 'op'");
    }
    const auto op = frame["op"].get<std::string>();
    auto topic_of = [&]() -> std::optional<Topic> {
      if (!frame.contains("topic") || !frame["topic"].is_string()) return std::nullopt;
      return session::parse_topic(frame["topic"].get<std::string>());
    };
    auto authorized = [&] {
      return frame.contains("token") && frame["token"].is_string() &&
             frame["token"].get<std::string>() == server_.opt.token;
    };
    if (op == "subscribe" || op == "unsubscribe") {
      const auto topic = topic_of();
      if (!topic) return error("unknown topic " + frame.value("topic", json()).dump());
      reply(json{{"ok", true}, {"op", op}, {"topic", session::to_string(*topic)}});
      if (op == "subscribe") {
        server_.hub.subscribe(*topic, shared_from_this());
      } else {
        server_.hub.unsubscribe(*topic, this);
      }
      return;
    }
    if (op == "publish") {
      if (!authorized()) return error("publish requires a valid token");
      const auto topic = topic_of();
      if (!topic) return error("unknown topic " + frame.value("topic", json()).dump());
      if (!frame.contains("payload")) return error("publish lacks 'payload'");
      try {
        const auto seq = server_.hub.publish(*topic, frame["payload"]);
        reply(json{{"ok", true}, {"op", "publish"}, {"topic", session::to_string(*topic)}, {"seq", seq}});
      } catch (const PublishError& e) {
        error(e.what());
      }
      return;
    }
    if (op == "command") {
      if (!authorized()) return error("command requires a valid token");
      if (!server_.on_command) return error("this hub accepts no commands");
      if (!frame.contains("command")) return error("command frame lacks 'command'");
      try {
        reply(server_.on_command(frame["command"]));
      } catch (const std::exception& e) {
        error(e.what());
      }
      return;
    }
    error("unknown op '" + op + "'");
  }

  void enqueue(std::shared_ptr<const std::string> frame, bool counted) {
    if (closed_.load()) {
      if (counted) pending_.fetch_sub(1);
      return;
    }
    outbox_.push_back({std::move(frame), counted});
    if (outbox_.size() == 1) write();
  }

  void write() {
    ws_.async_write(net::buffer(*outbox_.front().frame),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (outbox_.front().counted) pending_.fetch_sub(1);
    outbox_.pop_front();
    if (ec) {
      for (const auto& o : outbox_) {
        if (o.counted) pending_.fetch_sub(1);
      }
      outbox_.clear();
      return shutdown();
    }
    if (!outbox_.empty()) write();
  }

  void forget() {
    std::lock_guard lock(server_.mu);
    server_.connections.erase(id_);
  }

  struct Outgoing {
    std::shared_ptr<const std::string> frame;
    bool counted;
  };

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  std::uint64_t id_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> outbox_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<bool> closed_{false};
};

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!stopping.load() && acceptor.is_open()) accept();
      return;
    }
    std::shared_ptr<Connection> conn;
    {
      std::lock_guard lock(mu);
      const auto id = next_id++;
      conn = std::make_shared<Connection>(std::move(socket), *this, id);
      connections[id] = conn;
    }
    conn->run();
    accept();
  });
}

Server::Server(Hub& hub, ServerOptions opt, CommandHandler on_command)
    : impl_(std::make_unique<Impl>(hub, std::move(opt), std::move(on_command))) {
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->opt.host, ec);
  if (ec) throw std::runtime_error("bad host '" + impl_->opt.host + "': " + ec.message());
  const tcp::endpoint endpoint(address, impl_->opt.port);
  auto& acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(endpoint, ec);
  if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw std::runtime_error("cannot listen on " + impl_->opt.host + ":" +
                             std::to_string(impl_->opt.port) + ": " + ec.message());
  }
  impl_->port = acc.local_endpoint().port();
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->port; }

void Server::start() {
  impl_->work.emplace(net::make_work_guard(impl_->ioc));
  impl_->accept();
  for (int i = 0; i < std::max(1, impl_->opt.threads); ++i) {
    impl_->workers.emplace_back([this] { impl_->ioc.run(); });
  }
}

void Server::stop() {
  if (impl_->stopping.exchange(true)) return;
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  std::vector<std::shared_ptr<Connection>> live;
  {
    std::lock_guard lock(impl_->mu);
    for (const auto& [id, weak] : impl_->connections) {
      if (auto c = weak.lock()) live.push_back(std::move(c));
    }
  }
  for (const auto& c : live) c->close();
  live.clear();
  impl_->work.reset();
  // Let pending closes run, then stop whatever keeps the loop alive.
  for (int i = 0; i < 200 && connection_count() > 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  impl_->ioc.stop();
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
  impl_->workers.clear();
}

std::size_t Server::connection_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->connections.size();
}

}  // namespace findingplaces::sync
