#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/geo/geometry.hpp"

namespace findingplaces::geo {

struct Parcel {
  std::string id;
  MultiPolygon geometry;
  double area_m2 = 0.0;
  bool city_owned = false;
  std::string designation;
  /// Extra properties, string-keyed.
  nlohmann::json attributes = nlohmann::json::object();
};

enum class Severity { HighlyRestrictive, LessRestrictive };

std::string_view to_string(Severity s);
/// Accepts "high" / "less".
std::optional<Severity> parse_severity(std::string_view s);

struct RestrictionLayer {
  std::string name;
  Severity severity = Severity::LessRestrictive;
  std::vector<PolygonShape> geometry;
};

/// Immutable id-keyed parcel collection with a bounding-box tree. Safe to
/// share across threads.
class ParcelSet {
 public:
  ParcelSet();
  ~ParcelSet();
  ParcelSet(ParcelSet&&) noexcept;
  ParcelSet& operator=(ParcelSet&&) noexcept;

  /// Throws std::invalid_argument on duplicate ids.
  static ParcelSet build(std::vector<Parcel> parcels);

  std::size_t size() const { return parcels_.size(); }
  bool empty() const { return parcels_.empty(); }

  /// Parcels in ascending id order.
  std::span<const Parcel> parcels() const { return parcels_; }

  const Parcel* find(std::string_view id) const;
  /// Throws std::out_of_range for unknown ids.
  const Parcel& at(std::string_view id) const;

  /// Indices (into parcels()) whose bounding box intersects `box`.
  std::vector<std::size_t> query(const Box& box) const;

  /// Bounding box of every parcel.
  Box bounds() const { return bounds_; }

  /// Id of the parcel containing `p`. A point on a shared boundary resolves to
  /// the lexicographically smallest id among the parcels touching it.
  std::optional<std::string> locate_point(PlanarPoint p) const;

 private:
  struct Index;

  std::vector<Parcel> parcels_;
  std::unique_ptr<Index> index_;
  Box bounds_;
};

namespace serial {
std::vector<std::optional<std::string>> locate_points(const ParcelSet& set,
                                                      std::span<const PlanarPoint> points);
}

namespace parallel {
std::vector<std::optional<std::string>> locate_points(const ParcelSet& set,
                                                      std::span<const PlanarPoint> points);
}

}  // namespace findingplaces::geo
