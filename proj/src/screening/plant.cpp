#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "findingplaces/screening/screening.hpp"

namespace findingplaces::screening {

using nlohmann::json;

namespace {

// Every planted value sits on the intended side of the bundled rules
// (data/rules.json); the truth below is what those rules must conclude.
const std::vector<std::string> kCleanDesignations{"green_space", "parking", "future_housing", "vacant"};
const std::vector<std::string> kOtherUse{"industrial", "commercial", "port", "agricultural"};
const std::vector<std::string> kGreenUse{"park", "playground", "sports_field"};
const std::vector<std::string> kBenignRegulations{"zoning_plan", "landscape_protection", "noise_zone"};
const std::vector<int> kDenominations{40, 100, 250, 500, 1000, 1500};

struct Draft {
  std::string designation;
  double area = 0;
  bool city_owned = false;
  bool transit = false;
  bool contaminated = false;
  bool monument = false;
  std::vector<std::string> regulations;
  std::map<std::string, double> coverage;
  int capacity = 0;
};

class Planter {
 public:
  explicit Planter(std::uint64_t seed) : rng_(seed) {}

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double hundredths(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_) / 100.0; }
  std::mt19937_64& rng() { return rng_; }

  Draft clean() {
    Draft d;
    d.designation = pick(kCleanDesignations);
    d.area = std::round(uniform(2500, 30000));
    d.city_owned = coin(0.5);
    d.transit = coin(0.7);
    for (const auto& r : kBenignRegulations) {
      if (coin(0.25)) d.regulations.push_back(r);
    }
    if (coin(0.3)) d.coverage[coin(0.5) ? "park" : "recreation"] = hundredths(2, 20);
    d.capacity = pick(kDenominations);
    return d;
  }

 private:
  std::mt19937_64 rng_;
};

Verdict plant_initial(Planter& pl, Draft& d) {
  switch (pl.below(5)) {
    case 0:
      d.designation = pl.pick(kOtherUse);
      return {"", "", 0, Outcome::RejectedInitial, Reason::OtherLandUse, "other_use_designation"};
    case 1:
      d.designation = pl.pick(kGreenUse);
      return {"", "", 0, Outcome::RejectedInitial, Reason::DirectUseConflict, "green_or_play_space"};
    case 2:
      d.coverage[pl.coin(0.5) ? "park" : "recreation"] = pl.hundredths(50, 100);
      return {"", "", 0, Outcome::RejectedInitial, Reason::DirectUseConflict, "green_or_play_space"};
    case 3:
      d.coverage[pl.coin(0.7) ? "nature_conservation" : "cemetery"] = pl.hundredths(5, 100);
      return {"", "", 0, Outcome::RejectedInitial, Reason::OtherLandUse, "protected_area"};
    default:
      d.contaminated = true;
      return {"", "", 0, Outcome::RejectedInitial, Reason::TechnicalStructural, "contaminated_ground"};
  }
}

Verdict plant_detailed(Planter& pl, Draft& d) {
  switch (pl.below(4)) {
    case 0:
      d.area = std::round(pl.uniform(300, 1999));
      return {"", "", 0, Outcome::ExcludedDetailed, Reason::TechnicalStructural, "undersized"};
    case 1:
      d.coverage[pl.coin(0.5) ? "park" : "recreation"] = pl.hundredths(21, 49);
      return {"", "", 0, Outcome::ExcludedDetailed, Reason::DirectUseConflict, "partial_green_conflict"};
    case 2:
      if (pl.coin(0.5)) {
        d.monument = true;
      } else {
        d.regulations.push_back("monument_protection");
      }
      return {"", "", 0, Outcome::ExcludedDetailed, Reason::OtherLandUse, "listed_monument"};
    default:
      d.regulations.push_back("flood_zone");
      return {"", "", 0, Outcome::ExcludedDetailed, Reason::TechnicalStructural, "flood_zone"};
  }
}

void plant_future(Planter& pl, Draft& d) {
  // Fail readiness on at least one count, keep the rest random.
  const int miss = pl.below(3);
  if (miss == 0) d.city_owned = false;
  if (miss == 1) d.transit = false;
  if (miss == 2) d.capacity = pl.coin(0.5) ? 40 : 100;
}

std::string suitability_of(const Draft& d) {
  double high = 0, less = 0;
  for (const auto& [layer, f] : d.coverage) {
    if (layer == "nature_conservation" || layer == "cemetery") high = std::max(high, f);
    else less = std::max(less, f);
  }
  if (high >= 0.5) return "high";
  return high > 0 || less >= 0.5 ? "medium" : "low";
}

}  // namespace

PlantedCampaign plant_campaign(const PlantSpec& spec) {
  Planter pl(spec.seed);
  const std::size_t n = spec.rejected_initial + spec.excluded_detailed + spec.recommended + spec.future;
  std::vector<Outcome> plan;
  plan.insert(plan.end(), spec.rejected_initial, Outcome::RejectedInitial);
  plan.insert(plan.end(), spec.excluded_detailed, Outcome::ExcludedDetailed);
  plan.insert(plan.end(), spec.recommended, Outcome::Recommended);
  plan.insert(plan.end(), spec.future, Outcome::FutureConsideration);
  std::shuffle(plan.begin(), plan.end(), pl.rng());

  std::vector<int> parcel_numbers(n);
  for (std::size_t i = 0; i < n; ++i) parcel_numbers[i] = static_cast<int>(i) + 1;
  std::shuffle(parcel_numbers.begin(), parcel_numbers.end(), pl.rng());

  PlantedCampaign out;
  out.suggestions = json::array();
  std::map<std::string, int> per_session;
  for (std::size_t i = 0; i < n; ++i) {
    Draft d = pl.clean();
    Verdict truth{"", "", 0, plan[i], std::nullopt, ""};
    switch (plan[i]) {
      case Outcome::RejectedInitial: truth = plant_initial(pl, d); break;
      case Outcome::ExcludedDetailed: truth = plant_detailed(pl, d); break;
      case Outcome::Recommended:
        d.city_owned = true;
        d.transit = true;
        d.capacity = kDenominations[2 + pl.below(4)];
        break;
      case Outcome::FutureConsideration: plant_future(pl, d); break;
    }
    const auto session = "W" + std::to_string(1 + pl.below(7));
    const auto district = "D" + std::to_string(1 + pl.below(7));
    char pid[16];
    std::snprintf(pid, sizeof pid, "P%05d", parcel_numbers[i]);
    const int seq = ++per_session[session];
    truth.suggestion_id = session + "-" + std::to_string(seq);
    truth.parcel_id = pid;
    truth.capacity = d.capacity;

    double high = 0;
    json restrictions = json::array();
    for (const auto& [layer, f] : d.coverage) {
      restrictions.push_back(json{{"layer", layer}, {"coverage", f}});
      if (layer == "nature_conservation" || layer == "cemetery") high = std::max(high, f);
    }
    const auto suit = suitability_of(d);
    out.suggestions.push_back(json{
        {"session_id", session},
        {"district_id", district},
        {"proposal",
         {{"id", truth.suggestion_id},
          {"parcel_id", pid},
          {"capacity", d.capacity},
          {"suitability_at_placement", suit},
          {"created_seq", seq},
          {"status", "suggested"},
          {"withdrawn_seq", nullptr}}},
        {"detail",
         {{"parcel_id", pid},
          {"area_m2", d.area},
          {"designation", d.designation},
          {"city_owned", d.city_owned},
          {"regulations", d.regulations},
          {"restrictions", restrictions},
          {"suitability", suit},
          {"color", suit == "high" ? "red" : suit == "medium" ? "orange" : "yellow"},
          {"capacity", static_cast<int>(std::floor(d.area * (1 - high) / 30.0))}}},
        {"attributes",
         {{"district", district},
          {"regulations", d.regulations},
          {"contaminated", d.contaminated},
          {"transit_access", d.transit},
          {"monument", d.monument}}},
        {"comments", json::array()}});
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace findingplaces::screening
