#include "findingplaces/geo/geojson.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace findingplaces::geo {

using nlohmann::json;

namespace {

using Projector = std::function<PlanarPoint(double, double)>;

constexpr double kEarthRadiusM = 6371008.8;
// Relative tolerance between a declared area_m2 and the shoelace area.
constexpr double kAreaTolerance = 1e-3;

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw GeoParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                            std::to_string(col) + ": " + e.what(),
                        line, col);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Projector make_projector(const json& collection) {
  if (!collection.contains("projection")) {
    return [](double x, double y) { return PlanarPoint{x, y}; };
  }
  const json& proj = collection.at("projection");
  if (!proj.is_object() || proj.value("type", "") != "local_equirectangular" ||
      !proj.contains("origin") || !proj["origin"].is_array() || proj["origin"].size() != 2) {
    throw GeoParseError(
        "unsupported projection declaration (expected local_equirectangular with origin)", 0, 0);
  }
  const double lon0 = proj["origin"][0].get<double>();
  const double lat0 = proj["origin"][1].get<double>();
  const double deg = std::numbers::pi / 180.0;
  const double kx = kEarthRadiusM * deg * std::cos(lat0 * deg);
  const double ky = kEarthRadiusM * deg;
  return [=](double lon, double lat) { return PlanarPoint{(lon - lon0) * kx, (lat - lat0) * ky}; };
}

Ring ring_from_json(const json& coords, const Projector& project) {
  if (!coords.is_array()) {
    throw std::invalid_argument("ring is not an array");
  }
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw std::invalid_argument("position is not [x, y]");
    }
    ring.push_back(project(c[0].get<double>(), c[1].get<double>()));
  }
  return ring;
}

PolygonShape polygon_from_json(const json& rings, const Projector& project, std::size_t part) {
  if (!rings.is_array() || rings.empty()) {
    throw std::invalid_argument("polygon has no rings");
  }
  Ring exterior = ring_from_json(rings[0], project);
  orient_ring(exterior, true);
  std::vector<Ring> holes;
  for (std::size_t i = 1; i < rings.size(); ++i) {
    Ring h = ring_from_json(rings[i], project);
    orient_ring(h, false);
    holes.push_back(std::move(h));
  }
  try {
    return PolygonShape::create(std::move(exterior), std::move(holes));
  } catch (const GeometryError& e) {
    throw std::invalid_argument("polygon " + std::to_string(part) + " " + e.what());
  }
}

MultiPolygon geometry_from_json_with(const json& geometry, const Projector& project) {
  if (!geometry.is_object() || !geometry.contains("type") || !geometry.contains("coordinates")) {
    throw std::invalid_argument("geometry lacks type/coordinates");
  }
  const std::string type = geometry["type"].get<std::string>();
  const json& coords = geometry["coordinates"];
  MultiPolygon out;
  if (type == "Polygon") {
    out.push_back(polygon_from_json(coords, project, 0));
  } else if (type == "MultiPolygon") {
    if (!coords.is_array() || coords.empty()) {
      throw std::invalid_argument("empty MultiPolygon");
    }
    for (std::size_t i = 0; i < coords.size(); ++i) {
      out.push_back(polygon_from_json(coords[i], project, i));
    }
  } else {
    throw std::invalid_argument("unsupported geometry type '" + type + "'");
  }
  return out;
}

json ring_to_json(const Ring& ring) {
  json arr = json::array();
  for (const auto& p : ring) {
    arr.push_back(json::array({p.x, p.y}));
  }
  return arr;
}

json polygon_to_json(const PolygonShape& shape) {
  json rings = json::array();
  rings.push_back(ring_to_json(shape.exterior()));
  for (const auto& h : shape.holes()) {
    rings.push_back(ring_to_json(h));
  }
  return rings;
}

const json& features_of(const json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw GeoParseError("document is not a GeoJSON FeatureCollection", 1, 1);
  }
  return doc["features"];
}

}  // namespace

MultiPolygon geometry_from_json(const json& geometry) {
  return geometry_from_json_with(geometry, [](double x, double y) { return PlanarPoint{x, y}; });
}

json geometry_to_json(const MultiPolygon& shape) {
  if (shape.size() == 1) {
    return json{{"type", "Polygon"}, {"coordinates", polygon_to_json(shape.front())}};
  }
  json polys = json::array();
  for (const auto& part : shape) {
    polys.push_back(polygon_to_json(part));
  }
  return json{{"type", "MultiPolygon"}, {"coordinates", polys}};
}

IngestResult ingest_parcels(const std::string& geojson_text) {
  const json doc = parse_text(geojson_text);
  const json& features = features_of(doc);
  const Projector project = make_projector(doc);

  IngestResult result;
  std::vector<Parcel> parcels;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    std::string id;
    try {
      if (!f.is_object() || f.value("type", "") != "Feature") {
        throw std::invalid_argument("not a Feature object");
      }
      const json& props = f.at("properties");
      if (!props.is_object()) {
        throw std::invalid_argument("properties is not an object");
      }
      if (!props.contains("id") || !props["id"].is_string()) {
        throw std::invalid_argument("missing string property 'id'");
      }
      id = props["id"].get<std::string>();
      if (!props.contains("city_owned") || !props["city_owned"].is_boolean()) {
        throw std::invalid_argument("missing boolean property 'city_owned'");
      }
      if (!props.contains("designation") || !props["designation"].is_string()) {
        throw std::invalid_argument("missing string property 'designation'");
      }
      Parcel parcel;
      parcel.id = id;
      parcel.city_owned = props["city_owned"].get<bool>();
      parcel.designation = props["designation"].get<std::string>();
      parcel.geometry = geometry_from_json_with(f.at("geometry"), project);
      const double computed = polygon_area(parcel.geometry);
      if (props.contains("area_m2") && !props["area_m2"].is_null()) {
        const double declared = props["area_m2"].get<double>();
        if (std::abs(declared - computed) > kAreaTolerance * computed) {
          throw std::invalid_argument("declared area_m2 " + std::to_string(declared) +
                                      " differs from geometry area " + std::to_string(computed) +
                                      " by more than 0.1%");
        }
        parcel.area_m2 = declared;
      } else {
        parcel.area_m2 = computed;
      }
      for (const auto& [key, value] : props.items()) {
        if (key != "id" && key != "city_owned" && key != "designation" && key != "area_m2") {
          parcel.attributes[key] = value;
        }
      }
      auto [it, inserted] = first_seen.emplace(id, i);
      if (!inserted) {
        throw std::invalid_argument("duplicate id '" + id + "' (features " +
                                    std::to_string(it->second) + " and " + std::to_string(i) +
                                    ")");
      }
      parcels.push_back(std::move(parcel));
    } catch (const json::exception& e) {
      result.rejected.push_back({i, id, std::string("malformed feature: ") + e.what()});
    } catch (const std::invalid_argument& e) {
      result.rejected.push_back({i, id, e.what()});
    }
  }
  result.parcels = ParcelSet::build(std::move(parcels));
  return result;
}

IngestResult ingest_parcels_file(const std::filesystem::path& path) {
  return ingest_parcels(read_file(path));
}

json export_parcels(const ParcelSet& set) {
  json features = json::array();
  for (const auto& p : set.parcels()) {
    json props = p.attributes.is_object() ? p.attributes : json::object();
    props["id"] = p.id;
    props["city_owned"] = p.city_owned;
    props["designation"] = p.designation;
    props["area_m2"] = p.area_m2;
    features.push_back(
        json{{"type", "Feature"}, {"properties", props}, {"geometry", geometry_to_json(p.geometry)}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}};
}

RestrictionLayer load_restriction_layer(const std::string& geojson_text) {
  const json doc = parse_text(geojson_text);
  const json& features = features_of(doc);
  const Projector project = make_projector(doc);
  RestrictionLayer layer;
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw GeoParseError("restriction layer lacks a string 'name'", 1, 1);
  }
  layer.name = doc["name"].get<std::string>();
  const auto severity = parse_severity(doc.value("severity", ""));
  if (!severity) {
    throw GeoParseError("layer '" + layer.name + "': severity must be \"high\" or \"less\"", 1, 1);
  }
  layer.severity = *severity;
  for (std::size_t i = 0; i < features.size(); ++i) {
    try {
      for (auto& part : geometry_from_json_with(features[i].at("geometry"), project)) {
        layer.geometry.push_back(std::move(part));
      }
    } catch (const std::exception& e) {
      throw GeoParseError("layer '" + layer.name + "' feature " + std::to_string(i) + ": " +
                              e.what(),
                          0, 0, static_cast<long>(i));
    }
  }
  if (layer.geometry.empty()) {
    throw GeoParseError("layer '" + layer.name + "' has no geometry", 0, 0);
  }
  return layer;
}

RestrictionLayer load_restriction_layer_file(const std::filesystem::path& path) {
  return load_restriction_layer(read_file(path));
}

json export_restriction_layer(const RestrictionLayer& layer) {
  json features = json::array();
  for (const auto& shape : layer.geometry) {
    features.push_back(json{{"type", "Feature"},
                            {"properties", json::object()},
                            {"geometry", geometry_to_json(MultiPolygon{shape})}});
  }
  return json{{"type", "FeatureCollection"},
              {"name", layer.name},
              {"severity", to_string(layer.severity)},
              {"features", features}};
}

}  // namespace findingplaces::geo
