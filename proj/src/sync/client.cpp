#include "findingplaces/sync/client.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
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

std::int64_t steady_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Client::Impl {
  net::io_context ioc;
  websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  std::thread loop;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<json, std::int64_t>> inbox;
  std::deque<std::string> outbox;
  bool closed = false;

  void read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        std::lock_guard lock(mu);
        closed = true;
        cv.notify_all();
        return;
      }
      const auto at = steady_ns();
      json frame;
      try {
        frame = json::parse(beast::buffers_to_string(buffer.data()));
      } catch (const json::parse_error&) {
        frame = json{{"error", "client received a non-JSON frame"}};
      }
      buffer.consume(buffer.size());
      {
        std::lock_guard lock(mu);
        inbox.emplace_back(std::move(frame), at);
      }
      cv.notify_all();
      read();
    });
  }

  void write() {
    ws.async_write(net::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      outbox.pop_front();
      if (ec) {
        outbox.clear();
        return;
      }
      if (!outbox.empty()) write();
    });
  }
};

Client::Client(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->ioc);
  beast::error_code ec;
  const auto results = resolver.resolve(host, std::to_string(port), ec);
  if (!ec) beast::get_lowest_layer(impl_->ws).connect(results, ec);
  if (!ec) impl_->ws.handshake(host + ":" + std::to_string(port), "/", ec);
  if (ec) {
    throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port) + ": " +
                             ec.message());
  }
  impl_->ws.text(true);
  impl_->read();
  impl_->loop = std::thread([this] { impl_->ioc.run(); });
}

Client::~Client() { close(); }

void Client::send(const json& frame) {
  auto text = frame.dump();
  net::post(impl_->ioc, [this, text = std::move(text)]() mutable {
    impl_->outbox.push_back(std::move(text));
    if (impl_->outbox.size() == 1) impl_->write();
  });
}

std::optional<std::pair<json, std::int64_t>> Client::receive_timed(int timeout_ms) {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                     [&] { return !impl_->inbox.empty() || impl_->closed; });
  if (impl_->inbox.empty()) return std::nullopt;
  auto front = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return front;
}

std::optional<json> Client::receive(int timeout_ms) {
  auto r = receive_timed(timeout_ms);
  if (!r) return std::nullopt;
  return std::move(r->first);
}

bool Client::closed() const {
  std::lock_guard lock(impl_->mu);
  return impl_->closed;
}

void Client::close() {
  if (!impl_ || !impl_->loop.joinable()) return;
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    beast::get_lowest_layer(impl_->ws).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(impl_->ws).socket().close(ec);
  });
  impl_->loop.join();
}

void Client::subscribe(const std::string& topic) {
  send(json{{"op", "subscribe"}, {"topic", topic}});
}

void Client::publish(const std::string& topic, const json& payload, const std::string& token) {
  send(json{{"op", "publish"}, {"topic", topic}, {"payload", payload}, {"token", token}});
}

}  // namespace findingplaces::sync
