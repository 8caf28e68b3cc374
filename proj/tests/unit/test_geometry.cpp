#include <doctest.h>

#include <optional>
#include <random>

#include "findingplaces/geo/geometry.hpp"
#include "support/oracles.hpp"

using namespace findingplaces::geo;

namespace {

PolygonShape unit_square() { return oracle::rect(0, 0, 1, 1); }

}  // namespace

TEST_CASE("polygon_area of axis-aligned squares") {
  CHECK(polygon_area(unit_square()) == 1.0);
  for (double s : {0.5, 3.0, 17.0, 250.0, 1024.0}) {
    CHECK(polygon_area(oracle::rect(0, 0, s, s)) == s * s);
  }
}

TEST_CASE("polygon_area subtracts holes") {
  const auto shape = PolygonShape::create(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}},
      {{{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}, {0.75, 0.25}, {0.25, 0.25}}});
  CHECK(polygon_area(shape) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("polygon_area matches Monte-Carlo rasterization for random polygons") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const auto poly = oracle::random_star_polygon(rng, 20, {100, 200}, 10, 50);
    const double mc = oracle::mc_area(poly, 1'000'000, 100 + trial);
    CHECK(std::abs(polygon_area(poly) - mc) / mc < 0.005);
  }
}

TEST_CASE("construction rejects invalid rings with the violated invariant") {
  auto violation_of = [](Ring exterior, std::vector<Ring> holes = {}) {
    try {
      PolygonShape::create(std::move(exterior), std::move(holes));
    } catch (const GeometryError& e) {
      return std::optional<ShapeViolation>(e.violation());
    }
    return std::optional<ShapeViolation>();
  };
  CHECK(violation_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == ShapeViolation::NotClosed);
  CHECK(violation_of({{0, 0}, {1, 0}, {0, 0}}) == ShapeViolation::TooFewVertices);
  CHECK(violation_of({{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}}) ==
        ShapeViolation::SelfIntersection);
  CHECK(violation_of({{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}}) ==
        ShapeViolation::WrongOrientation);
  CHECK(violation_of({{0, 0}, {1, 0}, {2, 0}, {0, 0}}) == ShapeViolation::SelfIntersection);
  CHECK(violation_of({{0, 0}, {1, 0}, {1, NAN}, {0, 0}}) == ShapeViolation::NonFinite);
  CHECK(violation_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}},
                     {{{2, 2}, {2, 3}, {3, 3}, {3, 2}, {2, 2}}}) ==
        ShapeViolation::HoleOutsideExterior);
  CHECK(violation_of({{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}},
                     {{{1, 1}, {1, 2}, {2, 2}, {2, 1}, {1, 1}},
                      {{1.5, 1.5}, {1.5, 3}, {3, 3}, {3, 1.5}, {1.5, 1.5}}}) ==
        ShapeViolation::RingsCross);
  CHECK_FALSE(violation_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}).has_value());
}

TEST_CASE("consecutive duplicate vertices are dropped") {
  const auto shape =
      PolygonShape::create({{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  CHECK(shape.exterior().size() == 5);
}

TEST_CASE("locate_in_polygon distinguishes inside, boundary, outside and holes") {
  const auto shape = PolygonShape::create(
      {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}}, {{{1, 1}, {1, 3}, {3, 3}, {3, 1}, {1, 1}}});
  CHECK(locate_in_polygon(shape, {0.5, 0.5}) == Containment::Inside);
  CHECK(locate_in_polygon(shape, {2, 2}) == Containment::Outside);
  CHECK(locate_in_polygon(shape, {4, 2}) == Containment::Boundary);
  CHECK(locate_in_polygon(shape, {1, 2}) == Containment::Boundary);
  CHECK(locate_in_polygon(shape, {5, 2}) == Containment::Outside);
}

TEST_CASE("intersection_area trivial cases") {
  CHECK(intersection_area(oracle::rect(0, 0, 1, 1), oracle::rect(2, 2, 3, 3)) == 0.0);
  CHECK(intersection_area(oracle::rect(0, 0, 1, 1), oracle::rect(1, 0, 2, 1)) == 0.0);
  const auto sq = oracle::rect(0, 0, 10, 10);
  CHECK(intersection_area(sq, sq) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(intersection_area(sq, oracle::rect(5, 5, 15, 15)) == doctest::Approx(25.0));
  CHECK(intersection_area(sq, oracle::rect(0, 0, 10, 4)) == doctest::Approx(40.0));
  CHECK(intersection_area(sq, oracle::rect(-5, -5, 20, 20)) == doctest::Approx(100.0));
}

TEST_CASE("intersection_area respects holes") {
  const auto donut = PolygonShape::create(
      {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}}, {{{1, 1}, {1, 3}, {3, 3}, {3, 1}, {1, 1}}});
  CHECK(intersection_area(donut, oracle::rect(1, 1, 3, 3)) == doctest::Approx(0.0));
  CHECK(intersection_area(donut, oracle::rect(0, 0, 2, 2)) == doctest::Approx(3.0));
  CHECK(intersection_area(donut, donut) == doctest::Approx(12.0));
}

TEST_CASE("intersection_area of rotated rectangles matches Monte-Carlo within 1%") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.14159);
  for (int trial = 0; trial < 4; ++trial) {
    const auto a = oracle::rotated_rect({0, 0}, 40, 20, u(rng));
    const auto b = oracle::rotated_rect({8, 5}, 30, 25, u(rng));
    const double mc = oracle::mc_intersection_area(a, b, 1'000'000, 500 + trial);
    const double got = intersection_area(a, b);
    CHECK(std::abs(got - mc) / mc < 0.01);
  }
}

TEST_CASE("intersection_area is symmetric and monotone") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_star_polygon(rng, 12, {0, 0}, 5, 30);
    const auto b = oracle::random_star_polygon(rng, 15, {10, 4}, 5, 30);
    const double ab = intersection_area(a, b);
    const double ba = intersection_area(b, a);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= a.area());
    CHECK(ab <= b.area());
  }
}

TEST_CASE("covered_area uses the union of overlapping covers") {
  const MultiPolygon parcel{oracle::rect(0, 0, 10, 10)};
  const auto left = oracle::rect(0, 0, 5, 10);
  const auto inner = oracle::rect(2, 0, 5, 10);
  const auto overhang = oracle::rect(-3, 0, 4, 10);
  std::vector<const PolygonShape*> covers{&left, &inner, &overhang};
  CHECK(covered_area(parcel, covers) == doctest::Approx(50.0));

  // Duplicated and fully contained covers change nothing.
  const auto dup = left;
  std::vector<const PolygonShape*> with_dup{&left, &dup, &inner};
  CHECK(covered_area(parcel, with_dup) == doctest::Approx(50.0));
}

TEST_CASE("covered_area with shared edges and adjacent covers") {
  const MultiPolygon parcel{oracle::rect(0, 0, 10, 10)};
  const auto a = oracle::rect(0, 0, 5, 5);
  const auto b = oracle::rect(5, 0, 10, 5);
  const auto c = oracle::rect(0, 5, 5, 10);
  std::vector<const PolygonShape*> covers{&a, &b, &c};
  CHECK(covered_area(parcel, covers) == doctest::Approx(75.0));
}

TEST_CASE("covered_area of random stars agrees with sampling") {
  std::mt19937_64 rng(21);
  const auto subject = oracle::random_star_polygon(rng, 16, {0, 0}, 10, 30);
  std::vector<PolygonShape> covers;
  for (int i = 0; i < 4; ++i) {
    covers.push_back(oracle::random_star_polygon(rng, 10, {i * 8.0 - 12, i * 3.0 - 5}, 4, 18));
  }
  std::vector<const PolygonShape*> ptrs;
  for (const auto& c : covers) {
    ptrs.push_back(&c);
  }
  const double frac = covered_area(MultiPolygon{subject}, ptrs) / subject.area();
  const double mc = oracle::mc_coverage(subject, covers, 1'000'000, 99);
  CHECK(frac == doctest::Approx(mc).epsilon(0.01));
}

TEST_CASE("multipolygon area and intersection aggregate over components") {
  const MultiPolygon m{oracle::rect(0, 0, 1, 1), oracle::rect(3, 0, 5, 1)};
  CHECK(polygon_area(m) == 3.0);
  const MultiPolygon probe{oracle::rect(0.5, 0, 4, 1)};
  CHECK(intersection_area(m, probe) == doctest::Approx(1.5));
  CHECK(locate_in_polygon(m, {4, 0.5}) == Containment::Inside);
  CHECK(locate_in_polygon(m, {2, 0.5}) == Containment::Outside);
}
