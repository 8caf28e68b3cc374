#pragma once

// Test-only reference implementations. Kept deliberately naive and separate
// from the library code paths they check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "findingplaces/geo/geometry.hpp"

namespace oracle {

using findingplaces::geo::PlanarPoint;
using findingplaces::geo::PolygonShape;
using findingplaces::geo::Ring;

/// Even-odd crossing test over every ring of the polygon (exterior and
/// holes alike).
inline bool ray_cast(const PolygonShape& shape, PlanarPoint p) {
  bool inside = false;
  auto scan = [&](const Ring& ring) {
    for (std::size_t i = 0, j = ring.size() - 2; i + 1 < ring.size(); j = i++) {
      const PlanarPoint a = ring[i];
      const PlanarPoint b = ring[j];
      if (((a.y > p.y) != (b.y > p.y)) && (p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)) {
        inside = !inside;
      }
    }
  };
  scan(shape.exterior());
  for (const auto& h : shape.holes()) {
    scan(h);
  }
  return inside;
}

inline bool ray_cast(const std::vector<PolygonShape>& shape, PlanarPoint p) {
  for (const auto& part : shape) {
    if (ray_cast(part, p)) {
      return true;
    }
  }
  return false;
}

/// Distance from `p` to the nearest edge of any ring.
inline double boundary_distance(const PolygonShape& shape, PlanarPoint p) {
  double best = INFINITY;
  auto scan = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const double ax = ring[i].x, ay = ring[i].y;
      const double dx = ring[i + 1].x - ax, dy = ring[i + 1].y - ay;
      const double len2 = dx * dx + dy * dy;
      double t = len2 > 0 ? ((p.x - ax) * dx + (p.y - ay) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, std::hypot(p.x - (ax + t * dx), p.y - (ay + t * dy)));
    }
  };
  scan(shape.exterior());
  for (const auto& h : shape.holes()) {
    scan(h);
  }
  return best;
}

struct Bounds {
  double min_x, min_y, max_x, max_y;
};

inline Bounds bounds_of(const std::vector<const PolygonShape*>& shapes) {
  Bounds b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto* s : shapes) {
    for (const auto& p : s->exterior()) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
  }
  return b;
}

/// Monte-Carlo estimate of area(a ∩ b) over the union bounding box.
inline double mc_intersection_area(const PolygonShape& a, const PolygonShape& b, int samples,
                                   std::uint64_t seed) {
  const Bounds box = bounds_of({&a, &b});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.min_x, box.max_x);
  std::uniform_real_distribution<double> uy(box.min_y, box.max_y);
  long hits = 0;
  for (int i = 0; i < samples; ++i) {
    const PlanarPoint p{ux(rng), uy(rng)};
    if (ray_cast(a, p) && ray_cast(b, p)) {
      ++hits;
    }
  }
  return (box.max_x - box.min_x) * (box.max_y - box.min_y) * static_cast<double>(hits) / samples;
}

/// Monte-Carlo estimate of a polygon's area over its bounding box.
inline double mc_area(const PolygonShape& a, int samples, std::uint64_t seed) {
  const Bounds box = bounds_of({&a});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.min_x, box.max_x);
  std::uniform_real_distribution<double> uy(box.min_y, box.max_y);
  long hits = 0;
  for (int i = 0; i < samples; ++i) {
    if (ray_cast(a, PlanarPoint{ux(rng), uy(rng)})) {
      ++hits;
    }
  }
  return (box.max_x - box.min_x) * (box.max_y - box.min_y) * static_cast<double>(hits) / samples;
}

/// Fraction of `subject` covered by the union of `cover`, by sampling.
inline double mc_coverage(const PolygonShape& subject, const std::vector<PolygonShape>& cover,
                          int samples, std::uint64_t seed) {
  const Bounds box = bounds_of({&subject});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.min_x, box.max_x);
  std::uniform_real_distribution<double> uy(box.min_y, box.max_y);
  long in_subject = 0;
  long covered = 0;
  for (int i = 0; i < samples; ++i) {
    const PlanarPoint p{ux(rng), uy(rng)};
    if (!ray_cast(subject, p)) {
      continue;
    }
    ++in_subject;
    if (ray_cast(cover, p)) {
      ++covered;
    }
  }
  return in_subject == 0 ? 0.0 : static_cast<double>(covered) / in_subject;
}

/// Random star-shaped (hence simple) polygon with `n` vertices.
inline PolygonShape random_star_polygon(std::mt19937_64& rng, int n, PlanarPoint center,
                                        double r_min, double r_max) {
  std::uniform_real_distribution<double> ua(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> ur(r_min, r_max);
  std::vector<double> angles(n);
  for (auto& a : angles) {
    a = ua(rng);
  }
  std::sort(angles.begin(), angles.end());
  Ring ring;
  for (double a : angles) {
    const double r = ur(rng);
    ring.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  ring.push_back(ring.front());
  return PolygonShape::create(std::move(ring));
}

/// Rectangle of size w×h centred at `c`, rotated by `angle` radians.
inline PolygonShape rotated_rect(PlanarPoint c, double w, double h, double angle) {
  const double cs = std::cos(angle), sn = std::sin(angle);
  Ring ring;
  for (auto [sx, sy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}}) {
    const double x = 0.5 * w * sx;
    const double y = 0.5 * h * sy;
    ring.push_back({c.x + x * cs - y * sn, c.y + x * sn + y * cs});
  }
  return PolygonShape::create(std::move(ring));
}

inline PolygonShape rect(double x0, double y0, double x1, double y1) {
  return PolygonShape::create({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}});
}

}  // namespace oracle
