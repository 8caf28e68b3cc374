#include <doctest.h>

#include "findingplaces/geo/geojson.hpp"
#include "support/oracles.hpp"

using namespace findingplaces::geo;
using nlohmann::json;

namespace {

json square_feature(const std::string& id, double x0, double y0, double side) {
  return json{{"type", "Feature"},
              {"properties", {{"id", id}, {"city_owned", true}, {"designation", "vacant"}}},
              {"geometry",
               {{"type", "Polygon"},
                {"coordinates",
                 json::array({json::array({json::array({x0, y0}), json::array({x0 + side, y0}),
                                           json::array({x0 + side, y0 + side}),
                                           json::array({x0, y0 + side}),
                                           json::array({x0, y0})})})}}}};
}

json collection(const std::vector<json>& features) {
  json arr = json::array();
  for (const auto& f : features) {
    arr.push_back(f);
  }
  return json{{"type", "FeatureCollection"}, {"features", arr}};
}

}  // namespace

TEST_CASE("ingest three square parcels") {
  const auto doc = collection({square_feature("a", 0, 0, 10), square_feature("b", 10, 0, 20),
                               square_feature("c", 40, 0, 5)});
  const auto result = ingest_parcels(doc.dump());
  REQUIRE(result.rejected.empty());
  REQUIRE(result.parcels.size() == 3);
  CHECK(result.parcels.at("a").area_m2 == 100.0);
  CHECK(result.parcels.at("b").area_m2 == 400.0);
  CHECK(result.parcels.at("c").area_m2 == 25.0);
  CHECK(result.parcels.at("a").designation == "vacant");
}

TEST_CASE("unclosed ring rejects only that feature") {
  auto bad = square_feature("bad", 100, 100, 3);
  bad["geometry"]["coordinates"][0].erase(4);
  const auto doc = collection({square_feature("a", 0, 0, 10), bad, square_feature("c", 40, 0, 5)});
  const auto result = ingest_parcels(doc.dump());
  CHECK(result.parcels.size() == 2);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].feature_index == 1);
  CHECK(result.rejected[0].feature_id == "bad");
  CHECK(result.rejected[0].message.find("exterior ring") != std::string::npos);
  CHECK(result.rejected[0].message.find("not closed") != std::string::npos);
}

TEST_CASE("duplicate ids are rejected naming both features") {
  const auto doc = collection({square_feature("a", 0, 0, 10), square_feature("a", 20, 0, 10)});
  const auto result = ingest_parcels(doc.dump());
  CHECK(result.parcels.size() == 1);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].message.find("features 0 and 1") != std::string::npos);
}

TEST_CASE("missing required properties and bad declared area are rejected") {
  auto no_owner = square_feature("x", 0, 0, 1);
  no_owner["properties"].erase("city_owned");
  auto bad_area = square_feature("y", 5, 5, 2);
  bad_area["properties"]["area_m2"] = 4.1;
  auto good_area = square_feature("z", 9, 9, 2);
  good_area["properties"]["area_m2"] = 4.002;
  const auto result = ingest_parcels(collection({no_owner, bad_area, good_area}).dump());
  CHECK(result.parcels.size() == 1);
  CHECK(result.parcels.at("z").area_m2 == 4.002);
  CHECK(result.rejected.size() == 2);
}

TEST_CASE("malformed JSON reports its line") {
  const std::string text = "{\n  \"type\": \"FeatureCollection\",\n  \"features\": [\n    {,\n  ]\n}";
  try {
    ingest_parcels(text);
    FAIL("expected parse error");
  } catch (const GeoParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(ingest_parcels("{\"type\": \"Feature\"}"), GeoParseError);
}

TEST_CASE("clockwise exteriors are normalized on ingest") {
  auto f = square_feature("cw", 0, 0, 4);
  auto& ring = f["geometry"]["coordinates"][0];
  std::reverse(ring.begin(), ring.end());
  const auto result = ingest_parcels(collection({f}).dump());
  REQUIRE(result.parcels.size() == 1);
  CHECK(signed_ring_area(result.parcels.at("cw").geometry[0].exterior()) > 0);
}

TEST_CASE("ingest -> export -> ingest round trip is identical") {
  std::mt19937_64 rng(5);
  json features = json::array();
  for (int i = 0; i < 20; ++i) {
    const auto poly = oracle::random_star_polygon(rng, 9, {i * 100.0, 0}, 10, 40);
    json props = {{"id", "p" + std::to_string(i)},
                  {"city_owned", i % 2 == 0},
                  {"designation", "park"},
                  {"district", "d1"},
                  {"regulations", json::array({"B-Plan"})}};
    features.push_back(json{{"type", "Feature"},
                            {"properties", props},
                            {"geometry", geometry_to_json(MultiPolygon{poly})}});
  }
  const auto first = ingest_parcels(json{{"type", "FeatureCollection"}, {"features", features}}.dump());
  REQUIRE(first.rejected.empty());
  const auto second = ingest_parcels(export_parcels(first.parcels).dump());
  REQUIRE(second.parcels.size() == first.parcels.size());
  for (std::size_t i = 0; i < first.parcels.size(); ++i) {
    const auto& a = first.parcels.parcels()[i];
    const auto& b = second.parcels.parcels()[i];
    CHECK(a.id == b.id);
    CHECK(a.geometry == b.geometry);
    CHECK(a.area_m2 == b.area_m2);
    CHECK(a.attributes == b.attributes);
    CHECK(a.city_owned == b.city_owned);
  }
  CHECK(export_parcels(second.parcels).dump() == export_parcels(first.parcels).dump());
}

TEST_CASE("lon/lat input requires and applies a declared projection") {
  json f = {{"type", "Feature"},
            {"properties", {{"id", "ll"}, {"city_owned", false}, {"designation", "park"}}},
            {"geometry",
             {{"type", "Polygon"},
              {"coordinates", json::parse("[[[10.0,53.5],[10.001,53.5],[10.001,53.501],[10.0,53.501],[10.0,53.5]]]")}}}};
  json doc = {{"type", "FeatureCollection"},
              {"projection", {{"type", "local_equirectangular"}, {"origin", {10.0, 53.5}}}},
              {"features", json::array({f})}};
  const auto result = ingest_parcels(doc.dump());
  REQUIRE(result.parcels.size() == 1);
  // 0.001° × 0.001° at 53.5°N is roughly 66 m × 111 m.
  CHECK(result.parcels.at("ll").area_m2 == doctest::Approx(66.2 * 111.2).epsilon(0.01));
  doc["projection"] = {{"type", "utm"}};
  CHECK_THROWS_AS(ingest_parcels(doc.dump()), GeoParseError);
}

TEST_CASE("locate_point: centroid, outside, shared-edge tie-break") {
  std::vector<Parcel> parcels;
  for (auto [id, x0] : {std::pair{"m", 0.0}, {"b", 10.0}, {"z", 30.0}}) {
    Parcel p;
    p.id = id;
    p.geometry = {oracle::rect(x0, 0, x0 + 10, 10)};
    p.area_m2 = 100;
    parcels.push_back(p);
  }
  const auto set = ParcelSet::build(std::move(parcels));
  CHECK(set.locate_point({5, 5}) == "m");
  CHECK(set.locate_point({35, 5}) == "z");
  CHECK_FALSE(set.locate_point({25, 5}).has_value());
  CHECK_FALSE(set.locate_point({-100, -100}).has_value());
  // x = 10 is shared by "m" and "b"; the smaller id wins.
  CHECK(set.locate_point({10, 5}) == "b");
  CHECK(set.locate_point({30, 5}) == "z");
}

TEST_CASE("ParcelSet rejects duplicate ids and indexes every parcel") {
  Parcel a;
  a.id = "a";
  a.geometry = {oracle::rect(0, 0, 1, 1)};
  Parcel b = a;
  CHECK_THROWS_AS(ParcelSet::build({a, b}), std::invalid_argument);
  const auto set = ParcelSet::build({a});
  CHECK(set.query(Box{-1, -1, 2, 2}).size() == 1);
  CHECK(set.query(Box{5, 5, 6, 6}).empty());
}

TEST_CASE("restriction layers load with name and severity") {
  json doc = collection({square_feature("ignored", 0, 0, 10)});
  doc["name"] = "nature_conservation";
  doc["severity"] = "high";
  const auto layer = load_restriction_layer(doc.dump());
  CHECK(layer.name == "nature_conservation");
  CHECK(layer.severity == Severity::HighlyRestrictive);
  CHECK(layer.geometry.size() == 1);
  doc["severity"] = "medium";
  CHECK_THROWS_AS(load_restriction_layer(doc.dump()), GeoParseError);
  const auto back = load_restriction_layer(export_restriction_layer(layer).dump());
  CHECK(back.geometry == layer.geometry);
}
