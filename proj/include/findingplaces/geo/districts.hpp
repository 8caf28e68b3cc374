#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/geo/geometry.hpp"

namespace findingplaces::geo {

/// Administrative district: the unit a workshop session focuses on.
struct District {
  std::string id;
  std::string name;
  Box bounds;
  long population = 0;
  long refugees_current = 0;
  long accommodation_planned = 0;
};

nlohmann::json districts_to_json(const std::vector<District>& districts);
/// Throws std::invalid_argument on schema violations.
std::vector<District> districts_from_json(const nlohmann::json& doc);
std::vector<District> load_districts_file(const std::filesystem::path& path);

}  // namespace findingplaces::geo
