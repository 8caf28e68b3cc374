#include <algorithm>
#include <stdexcept>

#include "findingplaces/geo/geojson.hpp"
#include "findingplaces/session/session.hpp"

namespace findingplaces::session {

using nlohmann::json;

World::World(geo::ParcelSet parcels, std::vector<geo::RestrictionLayer> layers,
             std::vector<geo::District> districts, suitability::SuitabilityConfig cfg)
    : parcels_(std::move(parcels)),
      layers_(std::move(layers)),
      districts_(std::move(districts)),
      cfg_(cfg) {
  for (auto& a : suitability::classify_all(parcels_, layers_, cfg_)) {
    auto id = a.parcel_id;
    assessments_.emplace(std::move(id), std::move(a));
  }
}

World World::load(const std::filesystem::path& dir, suitability::SuitabilityConfig cfg) {
  namespace fs = std::filesystem;
  const auto parcels_path = dir / "parcels.geojson";
  if (!fs::exists(parcels_path)) {
    throw std::runtime_error("missing " + parcels_path.string());
  }
  auto ingest = geo::ingest_parcels_file(parcels_path);
  if (!ingest.rejected.empty()) {
    const auto& d = ingest.rejected.front();
    throw std::runtime_error(parcels_path.string() + ": " + std::to_string(ingest.rejected.size()) +
                             " invalid feature(s), first: feature " + std::to_string(d.feature_index) +
                             ": " + d.message);
  }
  std::vector<fs::path> layer_files;
  if (fs::is_directory(dir / "layers")) {
    for (const auto& entry : fs::directory_iterator(dir / "layers")) {
      if (entry.path().extension() == ".geojson") layer_files.push_back(entry.path());
    }
  }
  std::sort(layer_files.begin(), layer_files.end());
  std::vector<geo::RestrictionLayer> layers;
  for (const auto& path : layer_files) {
    layers.push_back(geo::load_restriction_layer_file(path));
  }
  auto districts = geo::load_districts_file(dir / "districts.json");
  return World(std::move(ingest.parcels), std::move(layers), std::move(districts), cfg);
}

const geo::District* World::district(std::string_view id) const {
  const auto it = std::find_if(districts_.begin(), districts_.end(),
                               [&](const geo::District& d) { return d.id == id; });
  return it == districts_.end() ? nullptr : &*it;
}

const suitability::SuitabilityAssessment& World::assessment(std::string_view parcel_id) const {
  const auto it = assessments_.find(parcel_id);
  if (it == assessments_.end()) {
    throw std::out_of_range("unknown parcel '" + std::string(parcel_id) + "'");
  }
  return it->second;
}

ParcelDetail World::detail(std::string_view parcel_id) const {
  const geo::Parcel& p = parcels_.at(parcel_id);
  const auto& a = assessment(parcel_id);
  ParcelDetail d;
  d.parcel_id = p.id;
  d.area_m2 = p.area_m2;
  d.designation = p.designation;
  d.city_owned = p.city_owned;
  if (const auto it = p.attributes.find("regulations");
      it != p.attributes.end() && it->is_array()) {
    for (const auto& r : *it) {
      if (r.is_string()) d.regulations.push_back(r.get<std::string>());
    }
  }
  for (const auto& layer : layers_) {
    const double f = suitability::coverage_fraction(p, layer);
    if (f > 0.0) d.restrictions.emplace_back(layer.name, f);
  }
  d.suitability = a.suitability;
  d.capacity = a.capacity;
  return d;
}

json to_json(const ParcelDetail& d) {
  json restrictions = json::array();
  for (const auto& [name, f] : d.restrictions) {
    restrictions.push_back(json{{"layer", name}, {"coverage", f}});
  }
  return json{{"parcel_id", d.parcel_id},
              {"area_m2", d.area_m2},
              {"designation", d.designation},
              {"city_owned", d.city_owned},
              {"regulations", d.regulations},
              {"restrictions", restrictions},
              {"suitability", suitability::to_string(d.suitability)},
              {"color", suitability::display_color(d.suitability)},
              {"capacity", d.capacity}};
}

}  // namespace findingplaces::session
