#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/geo/parcels.hpp"

namespace findingplaces::geo {

/// Malformed input; `line`/`column` point into the source text, or
/// `feature` names the offending feature index when the JSON itself parsed.
class GeoParseError : public std::runtime_error {
 public:
  GeoParseError(const std::string& what, std::size_t line, std::size_t column, long feature = -1)
      : std::runtime_error(what), line_(line), column_(column), feature_(feature) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  long feature() const { return feature_; }

 private:
  std::size_t line_;
  std::size_t column_;
  long feature_;
};

struct FeatureDiagnostic {
  std::size_t feature_index = 0;
  std::string feature_id;
  std::string message;
};

struct IngestResult {
  ParcelSet parcels;
  std::vector<FeatureDiagnostic> rejected;
};

/// Reads a GeoJSON FeatureCollection of parcels. Coordinates are planar
/// meters unless the collection declares
/// `"projection": {"type": "local_equirectangular", "origin": [lon, lat]}`,
/// in which case lon/lat degrees are projected once here. Ring winding is
/// normalized (exterior counter-clockwise); every other invariant violation
/// rejects the feature with a diagnostic.
IngestResult ingest_parcels(const std::string& geojson_text);
IngestResult ingest_parcels_file(const std::filesystem::path& path);

/// Serializes back to a planar FeatureCollection that re-ingests to an
/// identical set.
nlohmann::json export_parcels(const ParcelSet& set);

/// One layer per file: a FeatureCollection with top-level `name` and
/// `severity` ("high" | "less").
RestrictionLayer load_restriction_layer(const std::string& geojson_text);
RestrictionLayer load_restriction_layer_file(const std::filesystem::path& path);
nlohmann::json export_restriction_layer(const RestrictionLayer& layer);

/// GeoJSON geometry (Polygon or MultiPolygon) to validated shapes.
MultiPolygon geometry_from_json(const nlohmann::json& geometry);
nlohmann::json geometry_to_json(const MultiPolygon& shape);

}  // namespace findingplaces::geo
