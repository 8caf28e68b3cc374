#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "findingplaces/geo/parcels.hpp"

namespace findingplaces::suitability {

enum class SuitabilityClass { HighUnsuitability, MediumUnsuitability, LowUnsuitability };

/// "high" | "medium" | "low"
std::string_view to_string(SuitabilityClass c);
std::optional<SuitabilityClass> parse_class(std::string_view s);
/// Map rendering color: red / orange / yellow.
std::string_view display_color(SuitabilityClass c);

struct SuitabilityConfig {
  /// Highly-restrictive coverage at or above which a parcel is "significantly
  /// affected".
  double significance_threshold = 0.5;
  /// Less-restrictive coverage bound for the low class; fixed.
  static constexpr double kLowClassBound = 0.5;
  double density_m2_per_place = 30.0;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Coverage fractions at or below this are treated as zero and threshold
/// comparisons allow this much slack, so sliver artifacts of clipping never
/// flip a class.
inline constexpr double kCoverageEpsilon = 1e-9;

struct SuitabilityAssessment {
  std::string parcel_id;
  SuitabilityClass suitability = SuitabilityClass::LowUnsuitability;
  double high_coverage = 0.0;
  double less_coverage = 0.0;
  int capacity = 0;

  friend bool operator==(const SuitabilityAssessment&, const SuitabilityAssessment&) = default;
};

/// Restriction polygons grouped by severity for repeated coverage queries.
class LayerIndex {
 public:
  explicit LayerIndex(std::span<const geo::RestrictionLayer> layers);

  std::span<const geo::PolygonShape* const> polygons(geo::Severity s) const {
    return s == geo::Severity::HighlyRestrictive ? high_ : less_;
  }
  std::span<const geo::RestrictionLayer> layers() const { return layers_; }

 private:
  std::span<const geo::RestrictionLayer> layers_;
  std::vector<const geo::PolygonShape*> high_;
  std::vector<const geo::PolygonShape*> less_;
};

/// Fraction of the parcel covered by the union of the layer's polygons,
/// clamped to [0, 1].
double coverage_fraction(const geo::Parcel& parcel, const geo::RestrictionLayer& layer);

/// Union coverage over every polygon in `cover`.
double coverage_fraction(const geo::Parcel& parcel,
                         std::span<const geo::PolygonShape* const> cover);

/// Pure rule application on coverage fractions.
SuitabilityClass classify_coverage(double high, double less, const SuitabilityConfig& cfg);

/// floor(area × (1 − high) / density), never negative.
int capacity(double area_m2, double high_coverage, const SuitabilityConfig& cfg);
int capacity(const geo::Parcel& parcel, double high_coverage, const SuitabilityConfig& cfg);

SuitabilityAssessment classify(const geo::Parcel& parcel, const LayerIndex& layers,
                               const SuitabilityConfig& cfg);
SuitabilityAssessment classify(const geo::Parcel& parcel,
                               std::span<const geo::RestrictionLayer> layers,
                               const SuitabilityConfig& cfg);

namespace serial {
std::vector<SuitabilityAssessment> classify_all(const geo::ParcelSet& set,
                                                std::span<const geo::RestrictionLayer> layers,
                                                const SuitabilityConfig& cfg);
}

namespace parallel {
std::vector<SuitabilityAssessment> classify_all(const geo::ParcelSet& set,
                                                std::span<const geo::RestrictionLayer> layers,
                                                const SuitabilityConfig& cfg);
}

/// One assessment per parcel in ascending id order.
inline std::vector<SuitabilityAssessment> classify_all(
    const geo::ParcelSet& set, std::span<const geo::RestrictionLayer> layers,
    const SuitabilityConfig& cfg) {
  return parallel::classify_all(set, layers, cfg);
}

/// CSV: parcel_id,class,high_coverage,less_coverage,capacity
std::string assessments_to_csv(std::span<const SuitabilityAssessment> rows);

}  // namespace findingplaces::suitability
