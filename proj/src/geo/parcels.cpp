#include "findingplaces/geo/parcels.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace findingplaces::geo {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using BoostPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BoostBox = bg::model::box<BoostPoint>;
using TreeValue = std::pair<BoostBox, std::size_t>;

struct ParcelSet::Index {
  bgi::rtree<TreeValue, bgi::rstar<16>> tree;
};

namespace {

BoostBox to_boost(const Box& b) {
  return BoostBox(BoostPoint(b.min_x, b.min_y), BoostPoint(b.max_x, b.max_y));
}

}  // namespace

std::string_view to_string(Severity s) {
  return s == Severity::HighlyRestrictive ? "high" : "less";
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "high") {
    return Severity::HighlyRestrictive;
  }
  if (s == "less") {
    return Severity::LessRestrictive;
  }
  return std::nullopt;
}

ParcelSet::ParcelSet() : index_(std::make_unique<Index>()) {}
ParcelSet::~ParcelSet() = default;
ParcelSet::ParcelSet(ParcelSet&&) noexcept = default;
ParcelSet& ParcelSet::operator=(ParcelSet&&) noexcept = default;

ParcelSet ParcelSet::build(std::vector<Parcel> parcels) {
  std::sort(parcels.begin(), parcels.end(),
            [](const Parcel& a, const Parcel& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < parcels.size(); ++i) {
    if (parcels[i].id == parcels[i - 1].id) {
      throw std::invalid_argument("duplicate parcel id '" + parcels[i].id + "'");
    }
  }
  ParcelSet set;
  set.parcels_ = std::move(parcels);
  std::vector<TreeValue> values;
  values.reserve(set.parcels_.size());
  for (std::size_t i = 0; i < set.parcels_.size(); ++i) {
    const Box b = bounds_of(set.parcels_[i].geometry);
    values.emplace_back(to_boost(b), i);
    if (i == 0) {
      set.bounds_ = b;
    } else {
      set.bounds_.expand(b);
    }
  }
  // Packing constructor builds a balanced tree in one pass.
  set.index_->tree = bgi::rtree<TreeValue, bgi::rstar<16>>(values.begin(), values.end());
  return set;
}

const Parcel* ParcelSet::find(std::string_view id) const {
  auto it = std::lower_bound(parcels_.begin(), parcels_.end(), id,
                             [](const Parcel& p, std::string_view key) { return p.id < key; });
  if (it == parcels_.end() || it->id != id) {
    return nullptr;
  }
  return &*it;
}

const Parcel& ParcelSet::at(std::string_view id) const {
  const Parcel* p = find(id);
  if (p == nullptr) {
    throw std::out_of_range("unknown parcel id '" + std::string(id) + "'");
  }
  return *p;
}

std::vector<std::size_t> ParcelSet::query(const Box& box) const {
  std::vector<TreeValue> hits;
  index_->tree.query(bgi::intersects(to_boost(box)), std::back_inserter(hits));
  std::vector<std::size_t> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    out.push_back(h.second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::string> ParcelSet::locate_point(PlanarPoint p) const {
  // Indices are sorted, and parcels_ is sorted by id, so the first boundary
  // hit is already the smallest id.
  std::optional<std::size_t> boundary_hit;
  for (std::size_t i : query(Box{p.x, p.y, p.x, p.y})) {
    const Containment c = locate_in_polygon(parcels_[i].geometry, p);
    if (c == Containment::Inside) {
      if (boundary_hit && *boundary_hit < i) {
        return parcels_[*boundary_hit].id;
      }
      return parcels_[i].id;
    }
    if (c == Containment::Boundary && !boundary_hit) {
      boundary_hit = i;
    }
  }
  if (boundary_hit) {
    return parcels_[*boundary_hit].id;
  }
  return std::nullopt;
}

namespace serial {
std::vector<std::optional<std::string>> locate_points(const ParcelSet& set,
                                                      std::span<const PlanarPoint> points) {
  std::vector<std::optional<std::string>> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = set.locate_point(points[i]);
  }
  return out;
}
}  // namespace serial

namespace parallel {
std::vector<std::optional<std::string>> locate_points(const ParcelSet& set,
                                                      std::span<const PlanarPoint> points) {
  std::vector<std::optional<std::string>> out(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = set.locate_point(points[i]);
  }
  return out;
}
}  // namespace parallel

}  // namespace findingplaces::geo
