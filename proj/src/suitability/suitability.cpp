#include "findingplaces/suitability/suitability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace findingplaces::suitability {

std::string_view to_string(SuitabilityClass c) {
  switch (c) {
    case SuitabilityClass::HighUnsuitability: return "high";
    case SuitabilityClass::MediumUnsuitability: return "medium";
    case SuitabilityClass::LowUnsuitability: return "low";
  }
  return "low";
}

std::optional<SuitabilityClass> parse_class(std::string_view s) {
  if (s == "high") return SuitabilityClass::HighUnsuitability;
  if (s == "medium") return SuitabilityClass::MediumUnsuitability;
  if (s == "low") return SuitabilityClass::LowUnsuitability;
  return std::nullopt;
}

std::string_view display_color(SuitabilityClass c) {
  switch (c) {
    case SuitabilityClass::HighUnsuitability: return "red";
    case SuitabilityClass::MediumUnsuitability: return "orange";
    case SuitabilityClass::LowUnsuitability: return "yellow";
  }
  return "yellow";
}

void SuitabilityConfig::validate() const {
  if (!(significance_threshold > 0.0 && significance_threshold <= 1.0)) {
    throw std::invalid_argument("significance_threshold must lie in (0, 1]");
  }
  if (!(density_m2_per_place > 0.0) || !std::isfinite(density_m2_per_place)) {
    throw std::invalid_argument("density_m2_per_place must be positive");
  }
}

LayerIndex::LayerIndex(std::span<const geo::RestrictionLayer> layers) : layers_(layers) {
  for (const auto& layer : layers) {
    auto& bucket = layer.severity == geo::Severity::HighlyRestrictive ? high_ : less_;
    for (const auto& shape : layer.geometry) {
      bucket.push_back(&shape);
    }
  }
}

double coverage_fraction(const geo::Parcel& parcel,
                         std::span<const geo::PolygonShape* const> cover) {
  if (cover.empty() || parcel.area_m2 <= 0.0) {
    return 0.0;
  }
  const double covered = geo::covered_area(parcel.geometry, cover);
  const double fraction = std::clamp(covered / geo::polygon_area(parcel.geometry), 0.0, 1.0);
  return fraction <= kCoverageEpsilon ? 0.0 : fraction;
}

double coverage_fraction(const geo::Parcel& parcel, const geo::RestrictionLayer& layer) {
  std::vector<const geo::PolygonShape*> cover;
  cover.reserve(layer.geometry.size());
  for (const auto& s : layer.geometry) {
    cover.push_back(&s);
  }
  return coverage_fraction(parcel, cover);
}

SuitabilityClass classify_coverage(double high, double less, const SuitabilityConfig& cfg) {
  if (high >= cfg.significance_threshold - kCoverageEpsilon) {
    return SuitabilityClass::HighUnsuitability;
  }
  if (high > kCoverageEpsilon || less >= SuitabilityConfig::kLowClassBound - kCoverageEpsilon) {
    return SuitabilityClass::MediumUnsuitability;
  }
  return SuitabilityClass::LowUnsuitability;
}

int capacity(double area_m2, double high_coverage, const SuitabilityConfig& cfg) {
  const double usable = area_m2 * (1.0 - std::clamp(high_coverage, 0.0, 1.0));
  // Relative slack keeps exact multiples (750 / 30) from rounding down.
  const double places = std::floor(usable / cfg.density_m2_per_place * (1.0 + 1e-12));
  return places <= 0.0 ? 0 : static_cast<int>(places);
}

int capacity(const geo::Parcel& parcel, double high_coverage, const SuitabilityConfig& cfg) {
  return capacity(parcel.area_m2, high_coverage, cfg);
}

SuitabilityAssessment classify(const geo::Parcel& parcel, const LayerIndex& layers,
                               const SuitabilityConfig& cfg) {
  SuitabilityAssessment a;
  a.parcel_id = parcel.id;
  a.high_coverage = coverage_fraction(parcel, layers.polygons(geo::Severity::HighlyRestrictive));
  a.less_coverage = coverage_fraction(parcel, layers.polygons(geo::Severity::LessRestrictive));
  a.suitability = classify_coverage(a.high_coverage, a.less_coverage, cfg);
  a.capacity = capacity(parcel, a.high_coverage, cfg);
  return a;
}

SuitabilityAssessment classify(const geo::Parcel& parcel,
                               std::span<const geo::RestrictionLayer> layers,
                               const SuitabilityConfig& cfg) {
  return classify(parcel, LayerIndex(layers), cfg);
}

namespace serial {
std::vector<SuitabilityAssessment> classify_all(const geo::ParcelSet& set,
                                                std::span<const geo::RestrictionLayer> layers,
                                                const SuitabilityConfig& cfg) {
  cfg.validate();
  const LayerIndex index(layers);
  std::vector<SuitabilityAssessment> out;
  out.reserve(set.size());
  for (const auto& parcel : set.parcels()) {
    out.push_back(classify(parcel, index, cfg));
  }
  return out;
}
}  // namespace serial

namespace parallel {
std::vector<SuitabilityAssessment> classify_all(const geo::ParcelSet& set,
                                                std::span<const geo::RestrictionLayer> layers,
                                                const SuitabilityConfig& cfg) {
  cfg.validate();
  const LayerIndex index(layers);
  const auto parcels = set.parcels();
  std::vector<SuitabilityAssessment> out(parcels.size());
  const auto n = static_cast<std::ptrdiff_t>(parcels.size());
  // Per-parcel cost varies with nearby restriction polygons.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = classify(parcels[i], index, cfg);
  }
  return out;
}
}  // namespace parallel

std::string assessments_to_csv(std::span<const SuitabilityAssessment> rows) {
  std::string out = "parcel_id,class,high_coverage,less_coverage,capacity\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.parcel_id;
    out += ',';
    out += to_string(r.suitability);
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%d\n", r.high_coverage, r.less_coverage,
                  r.capacity);
    out += buf;
  }
  return out;
}

}  // namespace findingplaces::suitability
