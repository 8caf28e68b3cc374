#include "findingplaces/geo/geometry.hpp"

#include <algorithm>
#include <limits>

namespace findingplaces::geo {

namespace {

double cross(PlanarPoint o, PlanarPoint a, PlanarPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign_of(double v) { return (v > 0) - (v < 0); }

bool within_box(PlanarPoint a, PlanarPoint b, PlanarPoint p) {
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

// Distance tolerance (meters) for "point lies on segment" tests.
constexpr double kOnEdgeTolerance = 1e-9;

bool on_segment(PlanarPoint a, PlanarPoint b, PlanarPoint p) {
  if (!within_box(a, b, p)) {
    return false;
  }
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len == 0.0) {
    return a == p;
  }
  return std::abs(cross(a, b, p)) <= kOnEdgeTolerance * len;
}

bool segments_touch(PlanarPoint a, PlanarPoint b, PlanarPoint c, PlanarPoint d) {
  const int o1 = sign_of(cross(a, b, c));
  const int o2 = sign_of(cross(a, b, d));
  const int o3 = sign_of(cross(c, d, a));
  const int o4 = sign_of(cross(c, d, b));
  if (o1 * o2 < 0 && o3 * o4 < 0) {
    return true;
  }
  return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) ||
         on_segment(c, d, b);
}

bool segments_cross_properly(PlanarPoint a, PlanarPoint b, PlanarPoint c, PlanarPoint d) {
  const int o1 = sign_of(cross(a, b, c));
  const int o2 = sign_of(cross(a, b, d));
  const int o3 = sign_of(cross(c, d, a));
  const int o4 = sign_of(cross(c, d, b));
  return o1 * o2 < 0 && o3 * o4 < 0;
}

// Removes consecutive duplicates and validates closure, vertex count,
// finiteness and simplicity. Returns the cleaned ring.
Ring clean_ring(Ring ring, int ring_index) {
  for (const auto& p : ring) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw GeometryError(ShapeViolation::NonFinite, ring_index, "coordinate is not finite");
    }
  }
  if (ring.size() < 2 || ring.front() != ring.back()) {
    throw GeometryError(ShapeViolation::NotClosed, ring_index,
                        "first and last vertex differ");
  }
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  if (ring.size() < 4) {
    throw GeometryError(ShapeViolation::TooFewVertices, ring_index,
                        "ring has fewer than 3 distinct vertices");
  }
  const std::size_t edges = ring.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const PlanarPoint a = ring[i];
    const PlanarPoint b = ring[i + 1];
    for (std::size_t j = i + 1; j < edges; ++j) {
      const PlanarPoint c = ring[j];
      const PlanarPoint d = ring[j + 1];
      const bool next = j == i + 1;
      const bool wrap = i == 0 && j == edges - 1;
      if (next || wrap) {
        // Adjacent edges share exactly one vertex; anything more is a spike.
        const PlanarPoint far_a = next ? a : b;
        const PlanarPoint far_c = next ? d : c;
        const PlanarPoint shared = next ? b : a;
        if (sign_of(cross(shared, far_a, far_c)) == 0 &&
            (on_segment(shared, far_a, far_c) || on_segment(shared, far_c, far_a))) {
          throw GeometryError(ShapeViolation::SelfIntersection, ring_index,
                              "edges " + std::to_string(i) + " and " + std::to_string(j) +
                                  " overlap");
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) {
        throw GeometryError(ShapeViolation::SelfIntersection, ring_index,
                            "edges " + std::to_string(i) + " and " + std::to_string(j) +
                                " intersect");
      }
    }
  }
  if (signed_ring_area(ring) == 0.0) {
    throw GeometryError(ShapeViolation::ZeroArea, ring_index, "ring encloses no area");
  }
  return ring;
}

std::string ring_label(int ring_index) {
  return ring_index < 0 ? std::string("exterior ring") : "hole " + std::to_string(ring_index);
}

}  // namespace

void Box::expand(const Box& o) {
  min_x = std::min(min_x, o.min_x);
  min_y = std::min(min_y, o.min_y);
  max_x = std::max(max_x, o.max_x);
  max_y = std::max(max_y, o.max_y);
}

Box Box::of(std::span<const PlanarPoint> pts) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box b{inf, inf, -inf, -inf};
  for (const auto& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

std::string_view to_string(ShapeViolation v) {
  switch (v) {
    case ShapeViolation::NonFinite: return "non-finite coordinate";
    case ShapeViolation::NotClosed: return "ring not closed";
    case ShapeViolation::TooFewVertices: return "fewer than 3 distinct vertices";
    case ShapeViolation::SelfIntersection: return "self-intersection";
    case ShapeViolation::ZeroArea: return "zero area";
    case ShapeViolation::WrongOrientation: return "wrong ring orientation";
    case ShapeViolation::HoleOutsideExterior: return "hole outside exterior";
    case ShapeViolation::RingsCross: return "rings cross";
  }
  return "unknown";
}

GeometryError::GeometryError(ShapeViolation violation, int ring_index, const std::string& detail)
    : std::runtime_error(ring_label(ring_index) + ": " + std::string(to_string(violation)) +
                         " (" + detail + ")"),
      violation_(violation),
      ring_index_(ring_index) {}

double signed_ring_area(std::span<const PlanarPoint> ring) {
  if (ring.size() < 3) {
    return 0.0;
  }
  // Shift to the first vertex to limit cancellation at large coordinates.
  const PlanarPoint o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double ax = ring[i].x - o.x;
    const double ay = ring[i].y - o.y;
    const double bx = ring[i + 1].x - o.x;
    const double by = ring[i + 1].y - o.y;
    twice += ax * by - bx * ay;
  }
  return 0.5 * twice;
}

void orient_ring(Ring& ring, bool ccw) {
  const double a = signed_ring_area(ring);
  if ((ccw && a < 0) || (!ccw && a > 0)) {
    std::reverse(ring.begin(), ring.end());
  }
}

PolygonShape PolygonShape::create(Ring exterior, std::vector<Ring> holes) {
  PolygonShape shape;
  shape.exterior_ = clean_ring(std::move(exterior), -1);
  if (signed_ring_area(shape.exterior_) <= 0.0) {
    throw GeometryError(ShapeViolation::WrongOrientation, -1,
                        "exterior must be counter-clockwise");
  }
  shape.holes_.reserve(holes.size());
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const int idx = static_cast<int>(h);
    Ring hole = clean_ring(std::move(holes[h]), idx);
    if (signed_ring_area(hole) >= 0.0) {
      throw GeometryError(ShapeViolation::WrongOrientation, idx, "holes must be clockwise");
    }
    bool any_inside = false;
    for (const auto& p : hole) {
      const Containment c = locate_in_ring(shape.exterior_, p);
      if (c == Containment::Outside) {
        throw GeometryError(ShapeViolation::HoleOutsideExterior, idx,
                            "vertex lies outside the exterior");
      }
      any_inside = any_inside || c == Containment::Inside;
    }
    if (!any_inside) {
      throw GeometryError(ShapeViolation::HoleOutsideExterior, idx,
                          "hole does not reach the interior");
    }
    for (std::size_t i = 0; i + 1 < hole.size(); ++i) {
      for (std::size_t j = 0; j + 1 < shape.exterior_.size(); ++j) {
        if (segments_cross_properly(hole[i], hole[i + 1], shape.exterior_[j],
                                    shape.exterior_[j + 1])) {
          throw GeometryError(ShapeViolation::RingsCross, idx, "hole crosses the exterior");
        }
      }
    }
    for (std::size_t k = 0; k < shape.holes_.size(); ++k) {
      const Ring& other = shape.holes_[k];
      for (std::size_t i = 0; i + 1 < hole.size(); ++i) {
        for (std::size_t j = 0; j + 1 < other.size(); ++j) {
          if (segments_cross_properly(hole[i], hole[i + 1], other[j], other[j + 1])) {
            throw GeometryError(ShapeViolation::RingsCross, idx,
                                "hole crosses hole " + std::to_string(k));
          }
        }
      }
      if (locate_in_ring(other, hole.front()) == Containment::Inside ||
          locate_in_ring(hole, other.front()) == Containment::Inside) {
        throw GeometryError(ShapeViolation::RingsCross, idx,
                            "hole overlaps hole " + std::to_string(k));
      }
    }
    shape.holes_.push_back(std::move(hole));
  }

  double area = signed_ring_area(shape.exterior_);
  for (const auto& h : shape.holes_) {
    area += signed_ring_area(h);
  }
  if (!(area > 0.0)) {
    throw GeometryError(ShapeViolation::ZeroArea, -1, "holes consume the whole exterior");
  }
  shape.area_ = area;
  shape.bounds_ = Box::of(shape.exterior_);
  return shape;
}

double polygon_area(const PolygonShape& shape) { return shape.area(); }

double polygon_area(const MultiPolygon& shape) {
  double total = 0.0;
  for (const auto& part : shape) {
    total += part.area();
  }
  return total;
}

Box bounds_of(const MultiPolygon& shape) {
  if (shape.empty()) {
    return {};
  }
  Box b = shape.front().bounds();
  for (const auto& part : shape) {
    b.expand(part.bounds());
  }
  return b;
}

Containment locate_in_ring(std::span<const PlanarPoint> ring, PlanarPoint p) {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const PlanarPoint a = ring[i];
    const PlanarPoint b = ring[i + 1];
    if (on_segment(a, b, p)) {
      return Containment::Boundary;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) {
        inside = !inside;
      }
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

Containment locate_in_polygon(const PolygonShape& shape, PlanarPoint p) {
  if (!shape.bounds().contains(p)) {
    return Containment::Outside;
  }
  const Containment outer = locate_in_ring(shape.exterior(), p);
  if (outer != Containment::Inside) {
    return outer;
  }
  for (const auto& hole : shape.holes()) {
    const Containment c = locate_in_ring(hole, p);
    if (c == Containment::Boundary) {
      return Containment::Boundary;
    }
    if (c == Containment::Inside) {
      return Containment::Outside;
    }
  }
  return Containment::Inside;
}

Containment locate_in_polygon(const MultiPolygon& shape, PlanarPoint p) {
  Containment best = Containment::Outside;
  for (const auto& part : shape) {
    const Containment c = locate_in_polygon(part, p);
    if (c == Containment::Inside) {
      return c;
    }
    if (c == Containment::Boundary) {
      best = c;
    }
  }
  return best;
}

PlanarPoint centroid(const PolygonShape& shape) {
  const PlanarPoint o = shape.exterior().front();
  double cx = 0.0;
  double cy = 0.0;
  double twice_area = 0.0;
  auto accumulate = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const double ax = ring[i].x - o.x;
      const double ay = ring[i].y - o.y;
      const double bx = ring[i + 1].x - o.x;
      const double by = ring[i + 1].y - o.y;
      const double c = ax * by - bx * ay;
      twice_area += c;
      cx += (ax + bx) * c;
      cy += (ay + by) * c;
    }
  };
  accumulate(shape.exterior());
  for (const auto& h : shape.holes()) {
    accumulate(h);
  }
  return {o.x + cx / (3.0 * twice_area), o.y + cy / (3.0 * twice_area)};
}

}  // namespace findingplaces::geo
