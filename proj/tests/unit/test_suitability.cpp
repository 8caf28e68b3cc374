#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "findingplaces/citygen/citygen.hpp"
#include "findingplaces/suitability/suitability.hpp"
#include "support/oracles.hpp"

using namespace findingplaces;
using suitability::SuitabilityClass;
using suitability::SuitabilityConfig;

namespace {

geo::Parcel parcel_of(std::string id, geo::PolygonShape shape) {
  geo::Parcel p;
  p.id = std::move(id);
  p.area_m2 = shape.area();
  p.geometry.push_back(std::move(shape));
  return p;
}

geo::RestrictionLayer layer_of(std::string name, geo::Severity s,
                               std::vector<geo::PolygonShape> shapes) {
  return geo::RestrictionLayer{std::move(name), s, std::move(shapes)};
}

// Rules restated independently of the implementation.
SuitabilityClass expected_class(double h, double l, double threshold) {
  if (h >= threshold) return SuitabilityClass::HighUnsuitability;
  if (h > 0.0 || l >= 0.5) return SuitabilityClass::MediumUnsuitability;
  return SuitabilityClass::LowUnsuitability;
}

int rank(SuitabilityClass c) {
  switch (c) {
    case SuitabilityClass::LowUnsuitability: return 0;
    case SuitabilityClass::MediumUnsuitability: return 1;
    case SuitabilityClass::HighUnsuitability: return 2;
  }
  return -1;
}

}  // namespace

TEST_CASE("class names and colors") {
  CHECK(suitability::to_string(SuitabilityClass::HighUnsuitability) == "high");
  CHECK(suitability::display_color(SuitabilityClass::HighUnsuitability) == "red");
  CHECK(suitability::display_color(SuitabilityClass::MediumUnsuitability) == "orange");
  CHECK(suitability::display_color(SuitabilityClass::LowUnsuitability) == "yellow");
  CHECK(suitability::parse_class("medium") == SuitabilityClass::MediumUnsuitability);
  CHECK_FALSE(suitability::parse_class("red").has_value());
}

TEST_CASE("config validation") {
  SuitabilityConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.significance_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.significance_threshold = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.density_m2_per_place = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("coverage fraction trivial cases") {
  const auto p = parcel_of("p", oracle::rect(0, 0, 10, 10));
  const auto inside = layer_of("nc", geo::Severity::HighlyRestrictive, {oracle::rect(-5, -5, 20, 20)});
  const auto apart = layer_of("nc", geo::Severity::HighlyRestrictive, {oracle::rect(30, 30, 40, 40)});
  CHECK(suitability::coverage_fraction(p, inside) == doctest::Approx(1.0));
  CHECK(suitability::coverage_fraction(p, apart) == 0.0);
}

TEST_CASE("overlapping park polygons count once") {
  const auto shape = oracle::rect(0, 0, 100, 100);
  const auto p = parcel_of("p", shape);
  std::vector<geo::PolygonShape> parks{oracle::rect(0, 0, 50, 100), oracle::rect(20, -10, 50, 110),
                                       oracle::rect(10, 10, 40, 90)};
  const auto layer = layer_of("park", geo::Severity::LessRestrictive, parks);
  const double got = suitability::coverage_fraction(p, layer);
  CHECK(got == doctest::Approx(0.5).epsilon(1e-9));
  const double mc = oracle::mc_coverage(shape, parks, 1'000'000, 7);
  CHECK(std::abs(got - mc) < 0.01);
}

TEST_CASE("classify rule examples") {
  const SuitabilityConfig cfg;
  CHECK(suitability::classify_coverage(0.6, 0.0, cfg) == SuitabilityClass::HighUnsuitability);
  CHECK(suitability::classify_coverage(0.0, 0.0, cfg) == SuitabilityClass::LowUnsuitability);
  CHECK(suitability::classify_coverage(0.0, 0.3, cfg) == SuitabilityClass::LowUnsuitability);
  CHECK(suitability::classify_coverage(0.0, 0.55, cfg) == SuitabilityClass::MediumUnsuitability);
  CHECK(suitability::classify_coverage(0.0, 0.49, cfg) == SuitabilityClass::LowUnsuitability);
  CHECK(suitability::classify_coverage(0.0, 0.50, cfg) == SuitabilityClass::MediumUnsuitability);
  CHECK(suitability::classify_coverage(0.1, 0.0, cfg) == SuitabilityClass::MediumUnsuitability);
  CHECK(suitability::classify_coverage(0.5, 0.0, cfg) == SuitabilityClass::HighUnsuitability);
}

TEST_CASE("classify on rotated geometry near the 50% bound") {
  const SuitabilityConfig cfg;
  const auto p = parcel_of("p", oracle::rotated_rect({500, 300}, 80, 40, 0.3));
  // Less-restrictive coverage from clipping a parcel edge-to-edge.
  for (double frac : {0.49, 0.50, 0.55}) {
    const auto& ring = p.geometry.front().exterior();
    // Sub-rectangle spanning `frac` of the width, same orientation.
    const double angle = 0.3;
    const double w = 80 * frac;
    const geo::PlanarPoint start{(ring[0].x + ring[3].x) / 2, (ring[0].y + ring[3].y) / 2};
    const geo::PlanarPoint c{start.x + std::cos(angle) * w / 2, start.y + std::sin(angle) * w / 2};
    const auto cover = oracle::rotated_rect(c, w, 60, angle);
    const std::vector<geo::RestrictionLayer> layers{
        layer_of("park", geo::Severity::LessRestrictive, {cover})};
    const auto a = suitability::classify(p, std::span<const geo::RestrictionLayer>(layers), cfg);
    const double mc = oracle::mc_coverage(p.geometry.front(), {cover}, 200'000, 3);
    // Rotated vertices move by up to 0.5 mm when snapped.
    CHECK(std::abs(a.less_coverage - frac) < 1e-4);
    CHECK(std::abs(a.less_coverage - mc) < 0.01);
    CHECK(a.suitability == expected_class(0.0, a.less_coverage, 0.5));
  }
}

TEST_CASE("capacity examples and monotonicity") {
  const SuitabilityConfig cfg;
  CHECK(suitability::capacity(10'000.0, 0.0, cfg) == 333);
  CHECK(suitability::capacity(10'000.0, 1.0, cfg) == 0);
  CHECK(suitability::capacity(1'500.0, 0.5, cfg) == 25);
  int prev = 1 << 30;
  for (int i = 0; i <= 100; ++i) {
    const int c = suitability::capacity(7'777.0, i / 100.0, cfg);
    CHECK(c >= 0);
    CHECK(c <= prev);
    prev = c;
  }
  prev = 1 << 30;
  for (double density = 5; density < 200; density += 7) {
    SuitabilityConfig d;
    d.density_m2_per_place = density;
    const int c = suitability::capacity(7'777.0, 0.2, d);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("class predicates partition the unit square and are monotone in H") {
  for (double threshold : {0.5, 0.3, 1.0}) {
    SuitabilityConfig cfg;
    cfg.significance_threshold = threshold;
    for (int li = 0; li <= 100; ++li) {
      int prev_rank = -1;
      for (int hi = 0; hi <= 100; ++hi) {
        const double h = hi / 100.0;
        const double l = li / 100.0;
        const auto c = suitability::classify_coverage(h, l, cfg);
        const bool is_high = h >= threshold - 1e-12;
        const bool is_medium = !is_high && (h > 0.0 || l >= 0.5 - 1e-12);
        const bool is_low = h == 0.0 && l < 0.5 - 1e-12;
        REQUIRE(int(is_high) + int(is_medium) + int(is_low) == 1);
        CHECK(rank(c) == (is_high ? 2 : is_medium ? 1 : 0));
        CHECK(rank(c) >= prev_rank);
        prev_rank = rank(c);
      }
    }
  }
}

TEST_CASE("adding an already covered polygon leaves coverage unchanged") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto subject = oracle::random_star_polygon(rng, 12, {0, 0}, 20, 50);
    const auto p = parcel_of("s", subject);
    std::vector<geo::PolygonShape> cover{oracle::random_star_polygon(rng, 10, {15, 5}, 20, 40),
                                         oracle::rect(-60, -60, -5, 10)};
    auto layer = layer_of("l", geo::Severity::HighlyRestrictive, cover);
    const double before = suitability::coverage_fraction(p, layer);
    layer.geometry.push_back(oracle::rect(-50, -50, -10, 0));  // inside the second cover rect
    layer.geometry.push_back(cover.front());                   // exact duplicate
    const double after = suitability::coverage_fraction(p, layer);
    CHECK(after == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("classify_all over a synthetic city matches ledger") {
  citygen::CitySpec spec;
  spec.layers = citygen::default_layer_plans();
  const auto city = citygen::generate_city(spec);
  const auto set = geo::ParcelSet::build(city.parcels);
  const SuitabilityConfig cfg;
  const auto serial = suitability::serial::classify_all(set, city.layers, cfg);
  const auto parallel = suitability::parallel::classify_all(set, city.layers, cfg);
  REQUIRE(serial.size() == 1000);
  CHECK(serial == parallel);
  for (int run = 0; run < 5; ++run) {
    CHECK(suitability::classify_all(set, city.layers, cfg) == serial);
  }

  std::map<std::string, const citygen::ParcelTruth*> truth;
  for (const auto& t : city.ledger) truth[t.id] = &t;
  int mismatches = 0;
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < serial.size(); ++i) {
    const auto& a = serial[i];
    if (i > 0) CHECK(serial[i - 1].parcel_id < a.parcel_id);
    const auto& t = *truth.at(a.parcel_id);
    CHECK(a.high_coverage == doctest::Approx(t.high_coverage).epsilon(1e-9));
    CHECK(a.less_coverage == doctest::Approx(t.less_coverage).epsilon(1e-9));
    const auto want = expected_class(t.high_coverage, t.less_coverage, 0.5);
    if (a.suitability != want) ++mismatches;
    CHECK(a.capacity == static_cast<int>(std::floor(t.area_m2 * (1 - t.high_coverage) / 30.0 + 1e-9)));
    seen.insert({static_cast<int>(std::lround(t.less_coverage * 100)), rank(want)});
  }
  CHECK(mismatches == 0);
  // The planted fractions include both sides of the 50% bound.
  CHECK(seen.count({49, 0}) == 1);
  CHECK(seen.count({50, 1}) == 1);
}

TEST_CASE("empty set and csv export") {
  const auto set = geo::ParcelSet::build({});
  CHECK(suitability::classify_all(set, {}, SuitabilityConfig{}).empty());
  suitability::SuitabilityAssessment a{"P1", SuitabilityClass::MediumUnsuitability, 0.25, 0.5, 12};
  CHECK(suitability::assessments_to_csv(std::span(&a, 1)) ==
        "parcel_id,class,high_coverage,less_coverage,capacity\nP1,medium,0.250000,0.500000,12\n");
}
