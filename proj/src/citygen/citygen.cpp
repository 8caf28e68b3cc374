#include "findingplaces/citygen/citygen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "findingplaces/geo/geojson.hpp"

namespace findingplaces::citygen {

using nlohmann::json;

namespace {

using i64 = std::int64_t;

// All lattice values are integer millimetres.
constexpr i64 kRowHeightStep = 400;
constexpr i64 kShearStep = 400;
constexpr i64 kWidthStep = 100;
constexpr i64 kStreetWidth = 6000;
constexpr double kGapProbability = 0.06;
constexpr double kIslandProbability = 0.35;
constexpr double kHoleProbability = 0.04;
constexpr double kCityOwnedProbability = 0.6;

struct Para {
  i64 x0;  // bottom-left x
  i64 x1;  // bottom-right x
  i64 y0;
  i64 h;
  i64 d;  // shear: top edge is shifted by d
};

geo::PlanarPoint pt(i64 x, i64 y) {
  return {static_cast<double>(x) / 1000.0, static_cast<double>(y) / 1000.0};
}

geo::Ring para_ring(const Para& p) {
  return {pt(p.x0, p.y0), pt(p.x1, p.y0), pt(p.x1 + p.d, p.y0 + p.h), pt(p.x0 + p.d, p.y0 + p.h),
          pt(p.x0, p.y0)};
}

// Sub-parallelogram covering fractions [u0,u1] of the width and [v0,v1] of
// the height; all products land on the integer lattice by construction.
Para sub_para(const Para& p, i64 left, i64 right, i64 bottom, i64 top) {
  return Para{p.x0 + left + p.d * bottom / p.h, p.x0 + right + p.d * bottom / p.h, p.y0 + bottom,
              top - bottom, p.d * (top - bottom) / p.h};
}

const std::vector<std::pair<std::string, double>>& designations() {
  static const std::vector<std::pair<std::string, double>> table{
      {"park", 0.22},         {"green_space", 0.10}, {"agricultural", 0.08},
      {"sports_field", 0.08}, {"playground", 0.07},  {"parking", 0.08},
      {"commercial", 0.10},   {"industrial", 0.07},  {"future_housing", 0.08},
      {"port", 0.04},         {"vacant", 0.08}};
  return table;
}

const std::vector<std::string>& regulation_labels() {
  static const std::vector<std::string> labels{"zoning_plan", "landscape_protection",
                                               "flood_zone", "monument_protection",
                                               "noise_zone"};
  return labels;
}

std::string parcel_id(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%05d", n);
  return buf;
}

}  // namespace

std::vector<LayerPlan> default_layer_plans() {
  return {
      {"nature_conservation", geo::Severity::HighlyRestrictive, 0.10, {1.0, 0.6, 0.3, 0.5}, 0.2},
      {"cemetery", geo::Severity::HighlyRestrictive, 0.03, {1.0, 0.45}, 0.0},
      {"park", geo::Severity::LessRestrictive, 0.20, {0.3, 0.49, 0.5, 0.55, 0.8}, 0.3},
      {"recreation", geo::Severity::LessRestrictive, 0.08, {0.2, 0.6}, 0.0},
  };
}

std::vector<LayerPlan> layer_plans_from_json(const json& doc) {
  const json& arr = doc.is_object() && doc.contains("layers") ? doc["layers"] : doc;
  if (!arr.is_array() || arr.empty()) {
    throw std::invalid_argument("layer spec must be a non-empty array of layer plans");
  }
  std::vector<LayerPlan> plans;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
      throw std::invalid_argument("layer plan lacks a string 'name'");
    }
    LayerPlan plan;
    plan.name = item["name"].get<std::string>();
    const auto sev = geo::parse_severity(item.value("severity", ""));
    if (!sev) {
      throw std::invalid_argument("layer '" + plan.name + "': severity must be high or less");
    }
    plan.severity = *sev;
    plan.probability = item.value("probability", 0.0);
    plan.overlap_probability = item.value("overlap_probability", 0.0);
    if (!(plan.probability >= 0.0 && plan.probability <= 1.0) ||
        !(plan.overlap_probability >= 0.0 && plan.overlap_probability <= 1.0)) {
      throw std::invalid_argument("layer '" + plan.name + "': probabilities must lie in [0,1]");
    }
    if (!item.contains("fractions") || !item["fractions"].is_array() ||
        item["fractions"].empty()) {
      throw std::invalid_argument("layer '" + plan.name + "': fractions must be a non-empty array");
    }
    for (const auto& f : item["fractions"]) {
      const double v = f.get<double>();
      if (!(v > 0.0 && v <= 1.0)) {
        throw std::invalid_argument("layer '" + plan.name + "': fraction out of (0,1]");
      }
      plan.fractions.push_back(v);
    }
    if (std::any_of(plans.begin(), plans.end(),
                    [&](const LayerPlan& p) { return p.name == plan.name; })) {
      throw std::invalid_argument("duplicate layer name '" + plan.name + "'");
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

json layer_plans_to_json(const std::vector<LayerPlan>& plans) {
  json arr = json::array();
  for (const auto& p : plans) {
    arr.push_back(json{{"name", p.name},
                       {"severity", geo::to_string(p.severity)},
                       {"probability", p.probability},
                       {"fractions", p.fractions},
                       {"overlap_probability", p.overlap_probability}});
  }
  return json{{"layers", arr}};
}

GeneratedCity generate_city(const CitySpec& spec) {
  if (spec.n_parcels < 1) {
    throw std::invalid_argument("n_parcels must be at least 1");
  }
  if (spec.n_districts < 1) {
    throw std::invalid_argument("n_districts must be at least 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };

  GeneratedCity city;
  city.layers.reserve(spec.layers.size());
  for (const auto& plan : spec.layers) {
    city.layers.push_back(geo::RestrictionLayer{plan.name, plan.severity, {}});
  }

  const int slots_per_row =
      std::max(1, static_cast<int>(std::ceil(std::sqrt(spec.n_parcels * 1.1))));
  std::vector<double> design_weights;
  for (const auto& [_, w] : designations()) {
    design_weights.push_back(w);
  }
  std::discrete_distribution<std::size_t> pick_designation(design_weights.begin(),
                                                           design_weights.end());

  struct Pending {
    geo::Parcel parcel;
    ParcelTruth truth;
    Para main;
    bool eligible;
  };
  std::vector<Pending> pending;

  i64 y0 = 0;
  int made = 0;
  while (made < spec.n_parcels) {
    const i64 h = uniform_int(50, 150) * kRowHeightStep;       // 20–60 m
    const i64 d = uniform_int(-12, 12) * kShearStep;           // up to ±4.8 m
    i64 x = 0;
    for (int slot = 0; slot < slots_per_row && made < spec.n_parcels; ++slot) {
      const i64 w = uniform_int(150, 600) * kWidthStep;  // 15–60 m
      const Para para{x, x + w, y0, h, d};
      x += w;
      const bool gap = slot > 0 && unit(rng) < kGapProbability;
      if (gap) {
        // Water or open land: no parcel, but possibly a detached part of the
        // previous parcel.
        if (!pending.empty() && pending.back().main.y0 == y0 && unit(rng) < kIslandProbability) {
          Pending& prev = pending.back();
          const Para island = sub_para(para, w / 4, 3 * w / 4, h / 4, 3 * h / 4);
          prev.parcel.geometry.push_back(geo::PolygonShape::create(para_ring(island)));
          prev.truth.area_m2 += static_cast<double>((island.x1 - island.x0) * island.h) / 1e6;
          prev.eligible = false;
        }
        continue;
      }
      Pending p;
      p.main = para;
      p.eligible = true;
      p.parcel.id = parcel_id(++made);
      p.truth.id = p.parcel.id;
      p.truth.area_m2 = static_cast<double>(w * h) / 1e6;
      std::vector<geo::Ring> holes;
      if (unit(rng) < kHoleProbability) {
        const Para hole = sub_para(para, 2 * w / 5, 3 * w / 5, 2 * h / 5, 3 * h / 5);
        geo::Ring ring = para_ring(hole);
        std::reverse(ring.begin(), ring.end());
        holes.push_back(std::move(ring));
        p.truth.area_m2 -= static_cast<double>((hole.x1 - hole.x0) * hole.h) / 1e6;
        p.eligible = false;
      }
      p.parcel.geometry.push_back(geo::PolygonShape::create(para_ring(para), std::move(holes)));
      p.parcel.city_owned = unit(rng) < kCityOwnedProbability;
      p.parcel.designation = designations()[pick_designation(rng)].first;
      json regs = json::array();
      for (const auto& label : regulation_labels()) {
        if (unit(rng) < 0.25) {
          regs.push_back(label);
        }
      }
      p.parcel.attributes["regulations"] = regs;
      p.parcel.attributes["contaminated"] = unit(rng) < 0.06;
      p.parcel.attributes["transit_access"] = unit(rng) < 0.7;
      p.parcel.attributes["monument"] = unit(rng) < 0.03;
      pending.push_back(std::move(p));
    }
    y0 += h + kStreetWidth;
  }

  // Plantings. Highly restrictive strips grow from the left edge, less
  // restrictive ones from the right, so per-severity unions are max().
  for (auto& p : pending) {
    const i64 w = p.main.x1 - p.main.x0;
    i64 high_cover = 0;
    i64 less_cover = 0;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
      const LayerPlan& plan = spec.layers[li];
      // Draw unconditionally so the stream does not depend on eligibility.
      const double roll = unit(rng);
      const double pick = unit(rng);
      const double overlap_roll = unit(rng);
      if (!p.eligible || roll >= plan.probability) {
        continue;
      }
      const auto idx = std::min(plan.fractions.size() - 1,
                                static_cast<std::size_t>(pick * plan.fractions.size()));
      const i64 c = std::llround(plan.fractions[idx] * static_cast<double>(w));
      if (c <= 0) {
        continue;
      }
      const bool left = plan.severity == geo::Severity::HighlyRestrictive;
      const i64 from = left ? 0 : w - c;
      const i64 to = left ? c : w;
      auto& layer = city.layers[li];
      layer.geometry.push_back(
          geo::PolygonShape::create(para_ring(sub_para(p.main, from, to, 0, p.main.h))));
      if (overlap_roll < plan.overlap_probability && c >= 2) {
        const i64 mid_from = left ? c / 2 : w - c;
        const i64 mid_to = left ? c : w - c / 2;
        layer.geometry.push_back(
            geo::PolygonShape::create(para_ring(sub_para(p.main, mid_from, mid_to, 0, p.main.h))));
      }
      const double frac = static_cast<double>(c) / static_cast<double>(w);
      auto& slot = p.truth.layer_coverage[plan.name];
      slot = std::max(slot, frac);
      (left ? high_cover : less_cover) = std::max(left ? high_cover : less_cover, c);
    }
    p.truth.high_coverage = static_cast<double>(high_cover) / static_cast<double>(w);
    p.truth.less_coverage = static_cast<double>(less_cover) / static_cast<double>(w);
  }

  // Districts: equal-width vertical bands over the city extent.
  geo::Box extent = geo::bounds_of(pending.front().parcel.geometry);
  for (const auto& p : pending) {
    extent.expand(geo::bounds_of(p.parcel.geometry));
  }
  const double band = extent.width() / spec.n_districts;
  for (int k = 0; k < spec.n_districts; ++k) {
    geo::District d;
    d.id = "D" + std::to_string(k + 1);
    d.name = "District " + std::to_string(k + 1);
    d.bounds = geo::Box{extent.min_x + band * k, extent.min_y,
                        k + 1 == spec.n_districts ? extent.max_x : extent.min_x + band * (k + 1),
                        extent.max_y};
    d.population = uniform_int(150'000, 450'000);
    d.refugees_current = uniform_int(2'000, 9'000);
    d.accommodation_planned = uniform_int(500, 3'000);
    city.districts.push_back(d);
  }
  for (auto& p : pending) {
    const geo::PlanarPoint c = geo::centroid(p.parcel.geometry.front());
    const int k = std::clamp(static_cast<int>((c.x - extent.min_x) / band), 0,
                             spec.n_districts - 1);
    p.parcel.attributes["district"] = city.districts[k].id;
    p.truth.district_id = city.districts[k].id;
    p.parcel.area_m2 = p.truth.area_m2;
    city.parcels.push_back(std::move(p.parcel));
    city.ledger.push_back(std::move(p.truth));
  }
  // Layers that received no planting stay out of the output.
  city.layers.erase(std::remove_if(city.layers.begin(), city.layers.end(),
                                   [](const geo::RestrictionLayer& l) { return l.geometry.empty(); }),
                    city.layers.end());
  return city;
}

json ledger_to_json(const std::vector<ParcelTruth>& ledger) {
  json arr = json::array();
  for (const auto& t : ledger) {
    arr.push_back(json{{"id", t.id},
                       {"area_m2", t.area_m2},
                       {"high_coverage", t.high_coverage},
                       {"less_coverage", t.less_coverage},
                       {"layer_coverage", t.layer_coverage},
                       {"district", t.district_id}});
  }
  return json{{"parcels", arr}};
}

std::vector<ParcelTruth> ledger_from_json(const json& doc) {
  std::vector<ParcelTruth> out;
  for (const auto& item : doc.at("parcels")) {
    ParcelTruth t;
    t.id = item.at("id").get<std::string>();
    t.area_m2 = item.at("area_m2").get<double>();
    t.high_coverage = item.at("high_coverage").get<double>();
    t.less_coverage = item.at("less_coverage").get<double>();
    t.layer_coverage = item.value("layer_coverage", std::map<std::string, double>{});
    t.district_id = item.value("district", "");
    out.push_back(std::move(t));
  }
  return out;
}

void write_city(const GeneratedCity& city, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "layers");
  auto write = [](const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("cannot write " + path.string());
    }
    out << doc.dump() << '\n';
  };
  const auto set = geo::ParcelSet::build(city.parcels);
  write(dir / "parcels.geojson", geo::export_parcels(set));
  for (const auto& layer : city.layers) {
    write(dir / "layers" / (layer.name + ".geojson"), geo::export_restriction_layer(layer));
  }
  write(dir / "districts.json", geo::districts_to_json(city.districts));
  write(dir / "ledger.json", ledger_to_json(city.ledger));
}

}  // namespace findingplaces::citygen
