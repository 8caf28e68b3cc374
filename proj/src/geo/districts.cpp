#include "findingplaces/geo/districts.hpp"

#include <fstream>
#include <stdexcept>

namespace findingplaces::geo {

using nlohmann::json;

json districts_to_json(const std::vector<District>& districts) {
  json arr = json::array();
  for (const auto& d : districts) {
    arr.push_back(json{{"id", d.id},
                       {"name", d.name},
                       {"bounds", {d.bounds.min_x, d.bounds.min_y, d.bounds.max_x, d.bounds.max_y}},
                       {"population", d.population},
                       {"refugees_current", d.refugees_current},
                       {"accommodation_planned", d.accommodation_planned}});
  }
  return json{{"districts", arr}};
}

std::vector<District> districts_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("districts") || !doc["districts"].is_array()) {
    throw std::invalid_argument("districts document must hold a 'districts' array");
  }
  std::vector<District> out;
  for (const auto& d : doc["districts"]) {
    District district;
    district.id = d.at("id").get<std::string>();
    district.name = d.value("name", district.id);
    const auto& b = d.at("bounds");
    if (!b.is_array() || b.size() != 4) {
      throw std::invalid_argument("district '" + district.id + "': bounds must be [minx,miny,maxx,maxy]");
    }
    district.bounds = Box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                          b[3].get<double>()};
    if (!(district.bounds.min_x < district.bounds.max_x &&
          district.bounds.min_y < district.bounds.max_y)) {
      throw std::invalid_argument("district '" + district.id + "': empty bounds");
    }
    district.population = d.value("population", 0L);
    district.refugees_current = d.value("refugees_current", 0L);
    district.accommodation_planned = d.value("accommodation_planned", 0L);
    out.push_back(std::move(district));
  }
  return out;
}

std::vector<District> load_districts_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return districts_from_json(json::parse(in));
}

}  // namespace findingplaces::geo
