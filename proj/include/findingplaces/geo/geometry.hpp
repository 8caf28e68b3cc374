#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace findingplaces::geo {

/// A point in the projected planar frame, in meters (x east, y north).
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Explicitly closed ring: front() == back().
using Ring = std::vector<PlanarPoint>;

struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(PlanarPoint p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool intersects(const Box& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  void expand(const Box& o);

  static Box of(std::span<const PlanarPoint> pts);
};

/// Which invariant a rejected ring or polygon violated.
enum class ShapeViolation {
  NonFinite,
  NotClosed,
  TooFewVertices,
  SelfIntersection,
  ZeroArea,
  WrongOrientation,
  HoleOutsideExterior,
  RingsCross,
};

std::string_view to_string(ShapeViolation v);

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ShapeViolation violation, int ring_index, const std::string& detail);

  ShapeViolation violation() const { return violation_; }
  /// -1 for the exterior, otherwise the hole index.
  int ring_index() const { return ring_index_; }

 private:
  ShapeViolation violation_;
  int ring_index_;
};

/// Shoelace signed area of a closed ring; positive when counter-clockwise.
double signed_ring_area(std::span<const PlanarPoint> ring);

/// Validated polygon with optional holes. Exterior counter-clockwise, holes
/// clockwise, every ring closed and simple.
class PolygonShape {
 public:
  /// Throws GeometryError naming the violated invariant.
  static PolygonShape create(Ring exterior, std::vector<Ring> holes = {});

  const Ring& exterior() const { return exterior_; }
  const std::vector<Ring>& holes() const { return holes_; }
  const Box& bounds() const { return bounds_; }
  double area() const { return area_; }

  friend bool operator==(const PolygonShape& a, const PolygonShape& b) {
    return a.exterior_ == b.exterior_ && a.holes_ == b.holes_;
  }

 private:
  PolygonShape() = default;

  Ring exterior_;
  std::vector<Ring> holes_;
  Box bounds_;
  double area_ = 0.0;
};

using MultiPolygon = std::vector<PolygonShape>;

/// Reverse `ring` in place when its winding disagrees with `ccw`.
void orient_ring(Ring& ring, bool ccw);

double polygon_area(const PolygonShape& shape);
double polygon_area(const MultiPolygon& shape);
Box bounds_of(const MultiPolygon& shape);

enum class Containment { Outside, Boundary, Inside };

Containment locate_in_ring(std::span<const PlanarPoint> ring, PlanarPoint p);
Containment locate_in_polygon(const PolygonShape& shape, PlanarPoint p);
Containment locate_in_polygon(const MultiPolygon& shape, PlanarPoint p);

/// Area-weighted centroid of the exterior minus holes.
PlanarPoint centroid(const PolygonShape& shape);

/// Area of the planar intersection of two shapes. Coordinates are snapped to
/// a 1 mm grid before clipping.
double intersection_area(const PolygonShape& a, const PolygonShape& b);
double intersection_area(const MultiPolygon& a, const MultiPolygon& b);

/// Area of `subject` covered by the union of `cover`. Overlapping cover
/// polygons count once.
double covered_area(const MultiPolygon& subject, std::span<const PolygonShape* const> cover);

/// Snap resolution used by the clipper, in meters.
inline constexpr double kSnapGrid = 1e-3;

}  // namespace findingplaces::geo
