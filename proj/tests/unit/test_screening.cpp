#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "findingplaces/screening/screening.hpp"

using namespace findingplaces::screening;
using nlohmann::json;

namespace {

RuleSet bundled() { return RuleSet::load(FP_SOURCE_DIR "/data/rules.json"); }

json suggestion_entry(const std::string& id, const json& detail, const json& attributes, int capacity) {
  return json{{"session_id", "S"},
              {"district_id", "D1"},
              {"proposal", {{"id", id}, {"parcel_id", detail["parcel_id"]}, {"capacity", capacity}}},
              {"detail", detail},
              {"attributes", attributes}};
}

json clean_detail(const std::string& pid) {
  return json{{"parcel_id", pid},       {"area_m2", 5000.0},   {"designation", "vacant"},
              {"city_owned", true},     {"regulations", json::array()},
              {"restrictions", json::array()}, {"suitability", "low"}, {"capacity", 166}};
}

const json kCleanAttributes{{"contaminated", false}, {"transit_access", true}, {"monument", false}};

}  // namespace

TEST_CASE("empty suggestion list gives an all-zero report") {
  const auto r = screen({}, bundled());
  CHECK(r.funnel.suggested == 0);
  CHECK(r.funnel.feasible == 0);
  CHECK(r.funnel.total_capacity == 0);
  CHECK(summary_line(r.funnel) == "0 suggested / 0 feasible / 0 recommended / 0 future");
  CHECK(render_markdown(r) == "# Screening report\n\n0 suggested / 0 feasible / 0 recommended / 0 future\n");
}

TEST_CASE("parcel fully inside a park is rejected initially for direct use conflict") {
  auto detail = clean_detail("P1");
  detail["restrictions"] = json::array({json{{"layer", "park"}, {"coverage", 1.0}}});
  const auto s = suggestions_from_json(json::array({suggestion_entry("S-1", detail, kCleanAttributes, 500)}));
  const auto r = screen(s, bundled());
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].outcome == Outcome::RejectedInitial);
  CHECK(r.verdicts[0].reason == Reason::DirectUseConflict);
  CHECK(r.verdicts[0].rule == "green_or_play_space");
  const auto md = render_markdown(r);
  CHECK(md.find("green_or_play_space") != std::string::npos);
  CHECK(md.find("| 1 | S-1 | P1 | 500 | rejected_initial | direct_use_conflict | green_or_play_space |") !=
        std::string::npos);
}

TEST_CASE("stage order and readiness on hand-built cases") {
  const auto rules = bundled();
  auto small = clean_detail("P2");
  small["area_m2"] = 1200.0;
  auto flooded = clean_detail("P3");
  flooded["regulations"] = {"flood_zone"};
  auto dirty_small = clean_detail("P4");
  dirty_small["area_m2"] = 900.0;
  json dirty = kCleanAttributes;
  dirty["contaminated"] = true;
  json no_transit = kCleanAttributes;
  no_transit["transit_access"] = false;
  const auto s = suggestions_from_json(json::array({
      suggestion_entry("a", small, kCleanAttributes, 500),
      suggestion_entry("b", flooded, kCleanAttributes, 500),
      suggestion_entry("c", dirty_small, dirty, 500),
      suggestion_entry("d", clean_detail("P5"), kCleanAttributes, 250),
      suggestion_entry("e", clean_detail("P6"), kCleanAttributes, 100),
      suggestion_entry("f", clean_detail("P7"), no_transit, 1500),
  }));
  const auto r = screen(s, rules);
  CHECK(r.verdicts[0].rule == "undersized");
  CHECK(r.verdicts[1].reason == Reason::TechnicalStructural);
  CHECK(r.verdicts[1].outcome == Outcome::ExcludedDetailed);
  // Contamination is an initial rule, so it wins over the detailed size check.
  CHECK(r.verdicts[2].outcome == Outcome::RejectedInitial);
  CHECK(r.verdicts[2].rule == "contaminated_ground");
  CHECK(r.verdicts[3].outcome == Outcome::Recommended);
  CHECK(r.verdicts[4].outcome == Outcome::FutureConsideration);
  CHECK(r.verdicts[5].outcome == Outcome::FutureConsideration);
  CHECK(r.funnel.total_capacity == 3350);
  CHECK(r.funnel.recommended_capacity == 250);
  CHECK(r.funnel.by_reason.at(Reason::TechnicalStructural) == 3);
}

TEST_CASE("rule validation happens before screening") {
  const auto with_rule = [](const json& when, const char* stage = "initial") {
    return json{{"rules", json::array({json{{"name", "r"}, {"stage", stage}, {"reason", "other_land_use"}, {"when", when}}})}};
  };
  CHECK_THROWS_WITH_AS(RuleSet::from_json(with_rule({{"attr", "soil_ph"}, {"op", "<", }, {"value", 5}})),
                       "rule 'r': unknown attribute 'soil_ph'", RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"attr", "designation"}, {"op", "<"}, {"value", "x"}})), RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"attr", "area_m2"}, {"op", "=="}, {"value", "big"}})), RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"attr", "area_m2"}, {"op", "~"}, {"value", 1}})), RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"attr", "regulations"}, {"op", "=="}, {"value", "x"}})), RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"all", json::array()}})), RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(with_rule({{"attr", "area_m2"}, {"op", ">"}, {"value", 1}}, "final")), RuleError);
  auto layered = with_rule({{"coverage", "lake"}, {"op", ">"}, {"value", 0}});
  CHECK_NOTHROW(RuleSet::from_json(layered));
  layered["layers"] = {"park"};
  CHECK_THROWS_WITH_AS(RuleSet::from_json(layered), "rule 'r': unknown layer 'lake'", RuleError);
  json misordered{{"rules", json::array({
      json{{"name", "d"}, {"stage", "detailed"}, {"reason", "other_land_use"}, {"when", {{"attr", "area_m2"}, {"op", ">"}, {"value", 1}}}},
      json{{"name", "i"}, {"stage", "initial"}, {"reason", "other_land_use"}, {"when", {{"attr", "area_m2"}, {"op", ">"}, {"value", 1}}}}})}};
  CHECK_THROWS_WITH_AS(RuleSet::from_json(misordered), "rule 'i': initial rule after a detailed rule", RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(json{{"rules", json::array()}, {"readiness", {{"attr", "nope"}, {"op", "=="}, {"value", 1}}}}),
                  RuleError);
  CHECK_THROWS_AS(RuleSet::from_json(json{{"rules", json::array()}, {"attributes", {{"area_m2", "string"}}}}), RuleError);
  CHECK_THROWS_AS(suggestions_from_json(json::array({json{{"proposal", {{"id", "x"}, {"parcel_id", "P"}, {"capacity", 40}}}}})),
                  std::invalid_argument);
  // A rules document survives its own serialization.
  const auto rules = bundled();
  CHECK(RuleSet::from_json(rules.to_json()).to_json() == rules.to_json());
}

TEST_CASE("planted campaign matches its construction") {
  const auto campaign = plant_campaign({});
  const auto suggestions = suggestions_from_json(campaign.suggestions);
  REQUIRE(suggestions.size() == 161);
  const auto r = screen(suggestions, bundled());
  REQUIRE(r.verdicts.size() == campaign.truth.size());
  for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
    INFO("suggestion " << i << " " << r.verdicts[i].suggestion_id);
    CHECK(r.verdicts[i] == campaign.truth[i]);
  }
  CHECK(r.funnel.suggested == 161);
  CHECK(r.funnel.rejected_initial == 117);
  CHECK(r.funnel.feasible == 44);
  CHECK(r.funnel.excluded_detailed == 24);
  CHECK(r.funnel.recommended == 6);
  CHECK(r.funnel.future == 14);
  CHECK(summary_line(r.funnel) == "161 suggested / 44 feasible / 6 recommended / 14 future");
  std::set<std::string> ids;
  for (const auto& v : r.verdicts) ids.insert(v.suggestion_id);
  CHECK(ids.size() == 161);

  // Deterministic generation, rendering and JSON round trip.
  CHECK(plant_campaign({}).suggestions == campaign.suggestions);
  CHECK(render_markdown(r) == render_markdown(screen(suggestions, bundled())));
  const auto back = report_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  CHECK(render_markdown(back) == render_markdown(r));

  auto capped = bundled();
  capped.detail_budget = 4;
  const auto rc = screen(suggestions, capped);
  CHECK(rc.funnel.recommended == 4);
  CHECK(rc.funnel.future == 16);

  PlantSpec ten;
  ten.future = 10;
  ten.seed = 7;
  const auto r10 = screen(suggestions_from_json(plant_campaign(ten).suggestions), bundled());
  CHECK(summary_line(r10.funnel) == "157 suggested / 40 feasible / 6 recommended / 10 future");
}

namespace {

// Test-side model of a random rule: any/all over threshold comparisons on
// numeric attributes x0..x3 and coverages of layers L0..L2.
struct Cmp {
  bool coverage;
  int index;
  std::string op;
  double value;
};
struct FuzzRule {
  bool any;
  std::vector<Cmp> terms;
  Stage stage;
  Reason reason;
};

double fact(const Suggestion& s, const Cmp& c) {
  if (c.coverage) {
    const auto it = s.coverage.find("L" + std::to_string(c.index));
    return it == s.coverage.end() ? 0.0 : it->second;
  }
  return s.facts["x" + std::to_string(c.index)].get<double>();
}

bool holds(double a, const std::string& op, double b) {
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  return a >= b;
}

bool oracle_match(const FuzzRule& r, const Suggestion& s) {
  std::size_t n = 0;
  for (const auto& c : r.terms) n += holds(fact(s, c), c.op, c.value);
  return r.any ? n > 0 : n == r.terms.size();
}

json rule_json(const FuzzRule& r, const std::string& name) {
  json terms = json::array();
  for (const auto& c : r.terms) {
    if (c.coverage) terms.push_back(json{{"coverage", "L" + std::to_string(c.index)}, {"op", c.op}, {"value", c.value}});
    else terms.push_back(json{{"attr", "x" + std::to_string(c.index)}, {"op", c.op}, {"value", c.value}});
  }
  return json{{"name", name},
              {"stage", to_string(r.stage)},
              {"reason", to_string(r.reason)},
              {"when", {{r.any ? "any" : "all", terms}}}};
}

}  // namespace

TEST_CASE("fuzz: partition, monotonicity and order-insensitivity") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string> ops{"<", "<=", ">", ">="};
  auto grid = [&] { return std::round(unit(rng) * 20) / 20; };  // hits ties on purpose

  for (int trial = 0; trial < 1000; ++trial) {
    CAPTURE(trial);
    std::vector<FuzzRule> initial, detailed;
    const int n_rules = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n_rules; ++k) {
      FuzzRule r{rng() % 2 == 0, {}, rng() % 2 ? Stage::Initial : Stage::Detailed,
                 static_cast<Reason>(rng() % 3)};
      const int n_terms = 1 + static_cast<int>(rng() % 3);
      for (int t = 0; t < n_terms; ++t) {
        const bool cov = rng() % 3 == 0;
        r.terms.push_back({cov, static_cast<int>(rng() % (cov ? 3 : 4)), ops[rng() % 4], grid()});
      }
      (r.stage == Stage::Initial ? initial : detailed).push_back(r);
    }
    const FuzzRule readiness{rng() % 2 == 0, {{false, 0, ">=", grid()}, {true, 1, "<=", grid()}}, Stage::Detailed,
                             Reason::OtherLandUse};

    auto build = [&](const std::vector<FuzzRule>& ini, const std::vector<FuzzRule>& det) {
      json doc{{"attributes", {{"x0", "number"}, {"x1", "number"}, {"x2", "number"}, {"x3", "number"}}},
               {"rules", json::array()}};
      int id = 0;
      for (const auto* group : {&ini, &det}) {
        for (const auto& r : *group) doc["rules"].push_back(rule_json(r, "r" + std::to_string(id++)));
      }
      json ready = rule_json(readiness, "ready")["when"];
      doc["readiness"] = ready;
      return RuleSet::from_json(doc);
    };
    const auto rules = build(initial, detailed);

    json list = json::array();
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      json restrictions = json::array();
      for (int l = 0; l < 3; ++l) {
        if (rng() % 2) restrictions.push_back(json{{"layer", "L" + std::to_string(l)}, {"coverage", grid()}});
      }
      json attrs;
      for (int x = 0; x < 4; ++x) attrs["x" + std::to_string(x)] = grid();
      json detail{{"parcel_id", "P" + std::to_string(i)}, {"restrictions", restrictions}};
      list.push_back(json{{"proposal", {{"id", std::to_string(i)}, {"parcel_id", "P" + std::to_string(i)},
                                        {"capacity", 40 * (1 + static_cast<int>(rng() % 10))}}},
                          {"detail", detail},
                          {"attributes", attrs}});
    }
    const auto suggestions = suggestions_from_json(list);
    const auto r = serial::screen(suggestions, rules);
    const auto& f = r.funnel;
    REQUIRE(f.rejected_initial + f.excluded_detailed + f.recommended + f.future == suggestions.size());
    REQUIRE(f.feasible + f.rejected_initial == f.suggested);
    REQUIRE(f.excluded_detailed <= f.feasible);
    REQUIRE(f.recommended + f.future == f.feasible - f.excluded_detailed);

    for (std::size_t i = 0; i < suggestions.size(); ++i) {
      const auto& s = suggestions[i];
      const bool out_initial = std::any_of(initial.begin(), initial.end(), [&](const FuzzRule& q) { return oracle_match(q, s); });
      const bool out_detailed = std::any_of(detailed.begin(), detailed.end(), [&](const FuzzRule& q) { return oracle_match(q, s); });
      Outcome expect = Outcome::FutureConsideration;
      if (out_initial) expect = Outcome::RejectedInitial;
      else if (out_detailed) expect = Outcome::ExcludedDetailed;
      else if (oracle_match(readiness, s)) expect = Outcome::Recommended;
      REQUIRE(r.verdicts[i].outcome == expect);
      // The reason comes from the first matching rule of the stage.
      if (expect == Outcome::RejectedInitial || expect == Outcome::ExcludedDetailed) {
        const auto& group = expect == Outcome::RejectedInitial ? initial : detailed;
        const auto first = std::find_if(group.begin(), group.end(), [&](const FuzzRule& q) { return oracle_match(q, s); });
        REQUIRE(r.verdicts[i].reason == first->reason);
      }
    }

    // Reordering rules inside a stage can relabel reasons but never moves a
    // suggestion across the stage partition.
    auto ini2 = initial, det2 = detailed;
    std::shuffle(ini2.begin(), ini2.end(), rng);
    std::shuffle(det2.begin(), det2.end(), rng);
    const auto r2 = parallel::screen(suggestions, build(ini2, det2));
    for (std::size_t i = 0; i < suggestions.size(); ++i) REQUIRE(r2.verdicts[i].outcome == r.verdicts[i].outcome);

    // Serial and parallel agree byte for byte.
    REQUIRE(to_json(parallel::screen(suggestions, rules)).dump() == to_json(r).dump());
  }
}
