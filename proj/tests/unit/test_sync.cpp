#include <doctest.h>

#include <thread>

#include "findingplaces/sync/client.hpp"
#include "findingplaces/sync/hub.hpp"
#include "findingplaces/sync/schema.hpp"
#include "findingplaces/sync/server.hpp"

using namespace findingplaces;
using namespace findingplaces::sync;
using nlohmann::json;

namespace {

json stats(long remaining, long proposed) { return json{{"remaining", remaining}, {"proposed", proposed}}; }

// Skips acks and returns the next envelope or error frame.
std::optional<json> next_message(Client& c, int timeout_ms = 2000) {
  while (auto f = c.receive(timeout_ms)) {
    if (!f->contains("ok")) return f;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("schema subset validation") {
  const auto& s = topic_schema(Topic::GlobalStats);
  CHECK_FALSE(s.validate(stats(19'500, 500)).has_value());
  CHECK(s.validate(json{{"remaining", 1}}).value() == "payload: missing required field 'proposed'");
  CHECK(s.validate(json{{"remaining", 1.5}, {"proposed", 0}}).value() == "payload.remaining: expected integer");
  CHECK(s.validate(json{{"remaining", 1}, {"proposed", -1}}).has_value());
  CHECK(s.validate(json{{"remaining", 1}, {"proposed", 1}, {"extra", 1}}).value() ==
        "payload: unexpected field 'extra'");
  CHECK(topic_schema(Topic::MapExtents)
            .validate(json{{"station", "district"}, {"district_id", "D1"}, {"extent", {0, 0, 1}}, {"scale_denominator", 750}})
            .value() == "payload.extent: fewer than 4 items");
  CHECK(topic_schema(Topic::Proposals).validate(json{{"kind", "eaten"}, {"active_count", 0}}).has_value());
  CHECK_THROWS_AS(Schema::compile(json{{"type", "object"}, {"oneOf", json::array()}}), SchemaError);
  for (auto t : session::kAllTopics) CHECK(topic_schema_document(t)["title"] == session::to_string(t));
}

TEST_CASE("engine deltas satisfy the topic schemas") {
  // Every payload the engine can produce is exercised by the session tests;
  // here one of each kind is checked against the bundled schema.
  const std::vector<std::pair<Topic, json>> samples{
      {Topic::MapExtents, {{"station", "neighborhood"}, {"district_id", "D1"}, {"extent", {0, 0, 1, 1}},
                           {"scale_denominator", 750}, {"grid", {{"rows", 32}, {"cols", 32}}}}},
      {Topic::MapExtents, {{"station", "city_overview"}, {"district_id", "D1"}, {"extent", {0, 0, 1, 1}},
                           {"scale_denominator", nullptr}}},
      {Topic::Proposals, {{"kind", "created"}, {"active_count", 1},
                          {"proposal", {{"id", "S-1"}, {"parcel_id", "A"}, {"capacity", 500},
                                        {"suitability_at_placement", "low"}, {"created_seq", 3},
                                        {"status", "suggested"}, {"withdrawn_seq", nullptr}}}}},
      {Topic::ParcelDetail, {{"kind", "no_parcel"}, {"cell", {1, 2}}, {"point", {3.5, 4.5}}}},
  };
  for (const auto& [t, p] : samples) CHECK_FALSE(topic_schema(t).validate(p).has_value());
}

TEST_CASE("hub seq, snapshots and rejection") {
  Hub hub;
  auto a = std::make_shared<QueueSink>();
  auto b = std::make_shared<QueueSink>();
  hub.subscribe(Topic::GlobalStats, a);
  hub.subscribe(Topic::GlobalStats, b);
  CHECK(hub.publish(Topic::GlobalStats, stats(19'500, 500)) == 1);
  CHECK(a->pop(100)->seq == 1);
  CHECK(b->pop(100)->payload["remaining"] == 19'500);
  CHECK(hub.publish(Topic::GlobalStats, stats(19'000, 1000)) == 2);
  CHECK_THROWS_AS(hub.publish(Topic::GlobalStats, json{{"remaining", 3}}), PublishError);
  CHECK(hub.seq(Topic::GlobalStats) == 2);
  CHECK(hub.snapshot(Topic::GlobalStats)->payload["remaining"] == 19'000);
  for (int i = 0; i < 3; ++i) hub.publish(Topic::GlobalStats, stats(i, 0));
  auto late = std::make_shared<QueueSink>();
  hub.subscribe(Topic::GlobalStats, late);
  CHECK(late->pop(100)->seq == 5);
  CHECK(late->pop(10) == nullptr);
  auto quiet = std::make_shared<QueueSink>();
  hub.subscribe(Topic::ParcelDetail, quiet);
  CHECK(quiet->pop(10) == nullptr);
  hub.unsubscribe_all(a.get());
  hub.unsubscribe_all(b.get());
  hub.unsubscribe_all(late.get());
  hub.unsubscribe_all(quiet.get());
  CHECK(hub.total_subscribers() == 0);
}

TEST_CASE("slow subscriber is dropped, others unaffected") {
  Hub hub;
  auto slow = std::make_shared<QueueSink>(10);
  auto fast = std::make_shared<QueueSink>(1000);
  hub.subscribe(Topic::GlobalStats, slow);
  hub.subscribe(Topic::GlobalStats, fast);
  for (int i = 0; i < 50; ++i) hub.publish(Topic::GlobalStats, stats(i, 0));
  CHECK(slow->was_dropped());
  CHECK(hub.subscriber_count(Topic::GlobalStats) == 1);
  CHECK(fast->size() == 50);
  CHECK(hub.dropped_count() == 1);
}

TEST_CASE("concurrent publishers keep every topic gapless") {
  Hub hub;
  std::vector<std::shared_ptr<QueueSink>> sinks;
  for (int i = 0; i < 6; ++i) {
    sinks.push_back(std::make_shared<QueueSink>(10'000));
    hub.subscribe(Topic::GlobalStats, sinks.back());
    hub.subscribe(Topic::DistrictState, sinks.back());
  }
  const json district{{"district_id", "D1"}, {"station", "district"}, {"proposals_active", 0}, {"capacity_active", 0}};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) {
        if (t % 2) hub.publish(Topic::GlobalStats, stats(i, 0));
        else hub.publish(Topic::DistrictState, district);
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& s : sinks) {
    std::uint64_t expect_stats = 1, expect_district = 1;
    while (auto env = s->pop(0)) {
      auto& expect = env->topic == Topic::GlobalStats ? expect_stats : expect_district;
      CHECK(env->seq == expect);
      ++expect;
    }
    CHECK(expect_stats == 501);
    CHECK(expect_district == 501);
  }
}

TEST_CASE("websocket server protocol") {
  Hub hub;
  ServerOptions opt;
  opt.token = "secret";
  Server server(hub, opt, [](const json& cmd) { return json{{"ok", true}, {"op", "command"}, {"echo", cmd}}; });
  server.start();
  const auto port = server.port();
  REQUIRE(port != 0);

  SUBCASE("bind conflict is reported") {
    ServerOptions clash = opt;
    clash.port = port;
    CHECK_THROWS_AS(Server(hub, clash), std::runtime_error);
  }

  SUBCASE("subscribe, publish, snapshot, errors") {
    Client sub("127.0.0.1", port);
    Client pub("127.0.0.1", port);
    sub.subscribe("global_stats");
    auto ack = sub.receive(2000);
    REQUIRE(ack);
    CHECK((*ack)["ok"] == true);

    pub.publish("global_stats", stats(19'500, 500), "secret");
    auto ack2 = pub.receive(2000);
    REQUIRE(ack2);
    CHECK((*ack2)["seq"] == 1);
    auto env = next_message(sub);
    REQUIRE(env);
    CHECK((*env)["topic"] == "global_stats");
    CHECK((*env)["seq"] == 1);
    CHECK((*env)["payload"]["remaining"] == 19'500);
    CHECK((*env)["ts"].is_number_integer());

    pub.publish("global_stats", stats(1, 1), "wrong");
    CHECK((*pub.receive(2000))["error"] == "publish requires a valid token");
    pub.publish("global_stats", json{{"remaining", 1}}, "secret");
    CHECK((*pub.receive(2000))["error"].get<std::string>().find("missing required field") != std::string::npos);
    pub.send(json{{"op", "subscribe"}, {"topic", "weather"}});
    CHECK((*pub.receive(2000))["error"] == "unknown topic \"weather\"");
    pub.send(json("not an object"));
    CHECK((*pub.receive(2000))["error"].get<std::string>().rfind("malformed frame", 0) == 0);
    pub.send(json{{"op", "command"}, {"command", {{"cmd", "x"}}}, {"token", "secret"}});
    CHECK((*pub.receive(2000))["echo"]["cmd"] == "x");
    // Connection stays usable after errors.
    pub.publish("global_stats", stats(19'000, 1000), "secret");
    CHECK((*pub.receive(2000))["seq"] == 2);
    CHECK((*next_message(sub))["seq"] == 2);

    Client late("127.0.0.1", port);
    late.subscribe("global_stats");
    auto first = next_message(late);
    REQUIRE(first);
    CHECK((*first)["seq"] == 2);
    CHECK((*first)["payload"]["remaining"] == 19'000);
  }

  SUBCASE("disconnect prunes subscriptions") {
    {
      Client gone("127.0.0.1", port);
      gone.subscribe("proposals");
      REQUIRE(gone.receive(2000));
      // The ack precedes registration with the hub.
      for (int i = 0; i < 200 && hub.subscriber_count(Topic::Proposals) == 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      CHECK(hub.subscriber_count(Topic::Proposals) == 1);
    }
    for (int i = 0; i < 200 && hub.subscriber_count(Topic::Proposals) > 0; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    CHECK(hub.subscriber_count(Topic::Proposals) == 0);
    CHECK(hub.total_subscribers() == 0);
  }
  server.stop();
}
