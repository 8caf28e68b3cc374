#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/geo/districts.hpp"
#include "findingplaces/geo/parcels.hpp"

namespace findingplaces::citygen {

/// How one restriction layer is planted over generated parcels.
struct LayerPlan {
  std::string name;
  geo::Severity severity = geo::Severity::LessRestrictive;
  /// Chance that a given eligible parcel receives a planting.
  double probability = 0.0;
  /// Covered fraction drawn uniformly from this list.
  std::vector<double> fractions;
  /// Chance a planting is emitted as two overlapping polygons.
  double overlap_probability = 0.0;
};

struct CitySpec {
  std::uint64_t seed = 42;
  int n_parcels = 1000;
  int n_districts = 7;
  std::vector<LayerPlan> layers;
};

/// Ground truth recorded at creation time.
struct ParcelTruth {
  std::string id;
  double area_m2 = 0.0;
  double high_coverage = 0.0;
  double less_coverage = 0.0;
  std::map<std::string, double> layer_coverage;
  std::string district_id;
};

struct GeneratedCity {
  std::vector<geo::Parcel> parcels;
  std::vector<geo::RestrictionLayer> layers;
  std::vector<geo::District> districts;
  std::vector<ParcelTruth> ledger;
};

std::vector<LayerPlan> default_layer_plans();

/// Throws std::invalid_argument on a malformed spec.
std::vector<LayerPlan> layer_plans_from_json(const nlohmann::json& doc);
nlohmann::json layer_plans_to_json(const std::vector<LayerPlan>& plans);

/// Deterministic for a fixed spec. Parcels are sheared row blocks on a
/// 0.1 m lattice separated by streets; a few carry courtyard holes or a
/// detached second part. Plantings cover an exact left (highly restrictive)
/// or right (less restrictive) strip so ledger coverages are exact.
GeneratedCity generate_city(const CitySpec& spec);

nlohmann::json ledger_to_json(const std::vector<ParcelTruth>& ledger);
std::vector<ParcelTruth> ledger_from_json(const nlohmann::json& doc);

/// Writes parcels.geojson, layers/<name>.geojson, districts.json and
/// ledger.json under `dir`.
void write_city(const GeneratedCity& city, const std::filesystem::path& dir);

}  // namespace findingplaces::citygen
