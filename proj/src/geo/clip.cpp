// Intersection area by boundary integration.
//
// The area of R = (union of subject polygons) ∩ (union of cover polygons) is
// the shoelace sum over the oriented boundary of R. Every boundary piece of R
// lies on the boundary of some input polygon, so each input edge is split at
// every contact with edges of the other polygons and each piece is kept iff
// the region just left of it is in R and the region just right of it is not.
// Pieces shared by several inputs with the same direction are counted once.
//
// Vertices are snapped to the 1 mm grid and held as integers so orientation
// tests during splitting are exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "findingplaces/geo/geometry.hpp"

namespace findingplaces::geo {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

struct IPoint {
  i64 x;
  i64 y;
  friend bool operator==(const IPoint&, const IPoint&) = default;
};

struct IEdge {
  IPoint a;
  IPoint b;
  i64 min_x, min_y, max_x, max_y;
};

struct IPolygon {
  std::vector<IEdge> edges;
  i64 min_x, min_y, max_x, max_y;
};

i128 cross(i64 ax, i64 ay, i64 bx, i64 by) {
  return static_cast<i128>(ax) * by - static_cast<i128>(ay) * bx;
}

int sign_of(i128 v) { return (v > 0) - (v < 0); }

i64 snap(double v) { return static_cast<i64>(std::llround(v / kSnapGrid)); }

// Snapped rings that collapse or flip winding are dropped; their true area is
// below the snap resolution.
void append_ring(const Ring& ring, bool ccw, IPolygon& out) {
  std::vector<IPoint> pts;
  pts.reserve(ring.size());
  for (const auto& p : ring) {
    IPoint q{snap(p.x), snap(p.y)};
    if (pts.empty() || !(pts.back() == q)) {
      pts.push_back(q);
    }
  }
  if (pts.size() < 4 || !(pts.front() == pts.back())) {
    return;
  }
  i128 twice = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    twice += cross(pts[i].x, pts[i].y, pts[i + 1].x, pts[i + 1].y);
  }
  if (twice == 0 || (twice > 0) != ccw) {
    return;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const IPoint a = pts[i];
    const IPoint b = pts[i + 1];
    out.edges.push_back(IEdge{a, b, std::min(a.x, b.x), std::min(a.y, b.y),
                              std::max(a.x, b.x), std::max(a.y, b.y)});
  }
}

IPolygon snap_polygon(const PolygonShape& shape) {
  IPolygon poly;
  append_ring(shape.exterior(), true, poly);
  if (poly.edges.empty()) {
    return poly;
  }
  for (const auto& h : shape.holes()) {
    append_ring(h, false, poly);
  }
  poly.min_x = poly.min_y = std::numeric_limits<i64>::max();
  poly.max_x = poly.max_y = std::numeric_limits<i64>::min();
  for (const auto& e : poly.edges) {
    poly.min_x = std::min(poly.min_x, e.min_x);
    poly.min_y = std::min(poly.min_y, e.min_y);
    poly.max_x = std::max(poly.max_x, e.max_x);
    poly.max_y = std::max(poly.max_y, e.max_y);
  }
  return poly;
}

enum class Side { Outside, Inside, OnSame, OnOpposite };

// Tolerance (mm) for a piece midpoint lying on an input edge. Midpoints of
// collinear pieces are off by rounding only; unrelated lattice vertices sit
// at least 1/|edge| mm away from an edge line.
constexpr double kOnEdgeMm = 1e-6;

Side classify(const IPolygon& poly, double mx, double my, double dx, double dy) {
  if (mx < poly.min_x - kOnEdgeMm || mx > poly.max_x + kOnEdgeMm ||
      my < poly.min_y - kOnEdgeMm || my > poly.max_y + kOnEdgeMm) {
    return Side::Outside;
  }
  bool inside = false;
  for (const auto& e : poly.edges) {
    const double ax = static_cast<double>(e.a.x);
    const double ay = static_cast<double>(e.a.y);
    const double ex = static_cast<double>(e.b.x) - ax;
    const double ey = static_cast<double>(e.b.y) - ay;
    if (mx >= e.min_x - kOnEdgeMm && mx <= e.max_x + kOnEdgeMm && my >= e.min_y - kOnEdgeMm &&
        my <= e.max_y + kOnEdgeMm) {
      const double len = std::hypot(ex, ey);
      const double c = ex * (my - ay) - ey * (mx - ax);
      if (std::abs(c) <= kOnEdgeMm * len) {
        return ex * dx + ey * dy > 0 ? Side::OnSame : Side::OnOpposite;
      }
    }
    const double by = static_cast<double>(e.b.y);
    if ((ay > my) != (by > my)) {
      const double x_at = ax + (my - ay) * ex / ey;
      if (mx < x_at) {
        inside = !inside;
      }
    }
  }
  return inside ? Side::Inside : Side::Outside;
}

// Parameters in (0,1) along `e` where `f` touches it.
void contact_params(const IEdge& e, const IEdge& f, std::vector<double>& ts) {
  if (f.max_x < e.min_x || f.min_x > e.max_x || f.max_y < e.min_y || f.min_y > e.max_y) {
    return;
  }
  const i64 d1x = e.b.x - e.a.x;
  const i64 d1y = e.b.y - e.a.y;
  const i128 o_r = cross(d1x, d1y, f.a.x - e.a.x, f.a.y - e.a.y);
  const i128 o_s = cross(d1x, d1y, f.b.x - e.a.x, f.b.y - e.a.y);
  if (o_r == 0 && o_s == 0) {
    const double len2 = static_cast<double>(static_cast<i128>(d1x) * d1x +
                                            static_cast<i128>(d1y) * d1y);
    for (const IPoint q : {f.a, f.b}) {
      const double t =
          static_cast<double>(static_cast<i128>(q.x - e.a.x) * d1x +
                              static_cast<i128>(q.y - e.a.y) * d1y) /
          len2;
      if (t > 0.0 && t < 1.0) {
        ts.push_back(t);
      }
    }
    return;
  }
  if (sign_of(o_r) * sign_of(o_s) > 0) {
    return;
  }
  const i64 d2x = f.b.x - f.a.x;
  const i64 d2y = f.b.y - f.a.y;
  const i128 o_p = cross(d2x, d2y, e.a.x - f.a.x, e.a.y - f.a.y);
  const i128 o_q = cross(d2x, d2y, e.b.x - f.a.x, e.b.y - f.a.y);
  if (sign_of(o_p) * sign_of(o_q) > 0) {
    return;
  }
  const double t =
      static_cast<double>(o_p) / (static_cast<double>(o_p) - static_cast<double>(o_q));
  if (t > 0.0 && t < 1.0) {
    ts.push_back(t);
  }
}

bool boxes_overlap(const IPolygon& a, const IPolygon& b) {
  return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y && b.min_y <= a.max_y;
}

// Twice the area (mm^2) of (union of polys[0..n_subject)) ∩ (union of the rest).
double twice_clipped_area(const std::vector<IPolygon>& polys, std::size_t n_subject) {
  const std::size_t n = polys.size();
  double twice = 0.0;
  std::vector<double> ts;
  std::vector<double> cuts;
  for (std::size_t xi = 0; xi < n; ++xi) {
    const IPolygon& x = polys[xi];
    const bool x_is_subject = xi < n_subject;
    for (const IEdge& e : x.edges) {
      ts.assign({0.0, 1.0});
      for (std::size_t yi = 0; yi < n; ++yi) {
        if (yi == xi || !boxes_overlap(x, polys[yi])) {
          continue;
        }
        for (const IEdge& f : polys[yi].edges) {
          contact_params(e, f, ts);
        }
      }
      std::sort(ts.begin(), ts.end());
      const double ax = static_cast<double>(e.a.x);
      const double ay = static_cast<double>(e.a.y);
      const double dx = static_cast<double>(e.b.x) - ax;
      const double dy = static_cast<double>(e.b.y) - ay;
      const double len = std::hypot(dx, dy);
      // Merge parameters that different edges produce for one contact point.
      constexpr double kMergeMm = 1e-7;
      cuts.assign({0.0});
      for (double t : ts) {
        if ((t - cuts.back()) * len > kMergeMm) {
          cuts.push_back(t);
        }
      }
      if (cuts.back() != 1.0) {
        if ((1.0 - cuts.back()) * len <= kMergeMm && cuts.size() > 1) {
          cuts.back() = 1.0;
        } else {
          cuts.push_back(1.0);
        }
      }
      for (std::size_t k = 1; k < cuts.size(); ++k) {
        const double t0 = cuts[k - 1];
        const double t1 = cuts[k];
        const double tm = 0.5 * (t0 + t1);
        const double mx = ax + tm * dx;
        const double my = ay + tm * dy;

        bool left_subject = x_is_subject;
        bool right_subject = false;
        bool left_cover = !x_is_subject;
        bool right_cover = false;
        bool duplicate = false;
        for (std::size_t yi = 0; yi < n; ++yi) {
          if (yi == xi) {
            continue;
          }
          const Side s = classify(polys[yi], mx, my, dx, dy);
          const bool left = s == Side::Inside || s == Side::OnSame;
          const bool right = s == Side::Inside || s == Side::OnOpposite;
          if (yi < n_subject) {
            left_subject = left_subject || left;
            right_subject = right_subject || right;
          } else {
            left_cover = left_cover || left;
            right_cover = right_cover || right;
          }
          if (s == Side::OnSame && yi < xi) {
            duplicate = true;
          }
        }
        if (duplicate) {
          continue;
        }
        if ((left_subject && left_cover) && !(right_subject && right_cover)) {
          const double px = ax + t0 * dx;
          const double py = ay + t0 * dy;
          const double qx = ax + t1 * dx;
          const double qy = ay + t1 * dy;
          twice += px * qy - qx * py;
        }
      }
    }
  }
  return twice;
}

// Lexicographic order over vertex data so both argument orders of a
// symmetric operation run the identical computation.
bool shape_less(const PolygonShape& a, const PolygonShape& b) {
  auto key = [](const PlanarPoint& p) { return std::pair{p.x, p.y}; };
  const auto& ea = a.exterior();
  const auto& eb = b.exterior();
  return std::lexicographical_compare(
      ea.begin(), ea.end(), eb.begin(), eb.end(),
      [&](const PlanarPoint& p, const PlanarPoint& q) { return key(p) < key(q); });
}

// Shifts all snapped coordinates so the union bounding box starts at zero;
// keeps the shoelace products small.
void rebase(std::vector<IPolygon>& polys) {
  i64 ox = std::numeric_limits<i64>::max();
  i64 oy = std::numeric_limits<i64>::max();
  for (const auto& p : polys) {
    if (!p.edges.empty()) {
      ox = std::min(ox, p.min_x);
      oy = std::min(oy, p.min_y);
    }
  }
  if (ox == std::numeric_limits<i64>::max()) {
    return;
  }
  for (auto& p : polys) {
    for (auto& e : p.edges) {
      e.a.x -= ox;
      e.a.y -= oy;
      e.b.x -= ox;
      e.b.y -= oy;
      e.min_x -= ox;
      e.max_x -= ox;
      e.min_y -= oy;
      e.max_y -= oy;
    }
    p.min_x -= ox;
    p.max_x -= ox;
    p.min_y -= oy;
    p.max_y -= oy;
  }
}

double clipped_area(const std::vector<const PolygonShape*>& subject,
                    const std::vector<const PolygonShape*>& cover) {
  std::vector<IPolygon> polys;
  polys.reserve(subject.size() + cover.size());
  std::size_t n_subject = 0;
  for (const auto* s : subject) {
    IPolygon p = snap_polygon(*s);
    if (!p.edges.empty()) {
      polys.push_back(std::move(p));
      ++n_subject;
    }
  }
  for (const auto* c : cover) {
    IPolygon p = snap_polygon(*c);
    if (!p.edges.empty()) {
      polys.push_back(std::move(p));
    }
  }
  if (n_subject == 0 || polys.size() == n_subject) {
    return 0.0;
  }
  rebase(polys);
  const double area = 0.5 * twice_clipped_area(polys, n_subject) * kSnapGrid * kSnapGrid;
  return std::max(area, 0.0);
}

}  // namespace

double intersection_area(const PolygonShape& a, const PolygonShape& b) {
  if (!a.bounds().intersects(b.bounds())) {
    return 0.0;
  }
  const PolygonShape* first = &a;
  const PolygonShape* second = &b;
  if (shape_less(b, a)) {
    std::swap(first, second);
  }
  const double area = clipped_area({first}, {second});
  return std::min(area, std::min(a.area(), b.area()));
}

double intersection_area(const MultiPolygon& a, const MultiPolygon& b) {
  double total = 0.0;
  // Components of a valid multipolygon do not overlap, so pairwise sums are
  // exact.
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      total += intersection_area(pa, pb);
    }
  }
  return std::min(total, std::min(polygon_area(a), polygon_area(b)));
}

double covered_area(const MultiPolygon& subject, std::span<const PolygonShape* const> cover) {
  const Box sb = bounds_of(subject);
  std::vector<const PolygonShape*> relevant;
  for (const auto* c : cover) {
    if (c->bounds().intersects(sb)) {
      relevant.push_back(c);
    }
  }
  if (relevant.empty() || subject.empty()) {
    return 0.0;
  }
  std::vector<const PolygonShape*> parts;
  parts.reserve(subject.size());
  for (const auto& s : subject) {
    parts.push_back(&s);
  }
  return std::min(clipped_area(parts, relevant), polygon_area(subject));
}

}  // namespace findingplaces::geo
