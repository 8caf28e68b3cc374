// Regenerates the data/ bundle: seed city, lookup codes, the campaign-scale
// replay scenario and the planted screening campaign.
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>

#include "findingplaces/citygen/citygen.hpp"
#include "findingplaces/screening/screening.hpp"
#include "findingplaces/session/session.hpp"
#include "findingplaces/session/store.hpp"

using namespace findingplaces;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

bool created(const session::ApplyResult& r) {
  return std::any_of(r.deltas.begin(), r.deltas.end(), [](const session::StateDelta& d) {
    return d.topic == session::Topic::Proposals && d.payload.value("kind", "") == "created";
  });
}

// 161 bricks worth 24,050 places.
std::vector<int> campaign_capacities(std::mt19937_64& rng) {
  std::vector<int> caps;
  for (auto [d, n] : std::vector<std::pair<int, int>>{{40, 50}, {100, 73}, {250, 27}, {500, 7}, {1000, 3}, {1500, 1}}) {
    caps.insert(caps.end(), n, d);
  }
  std::shuffle(caps.begin(), caps.end(), rng);
  return caps;
}

struct Recorder {
  session::SessionEngine engine;
  session::ScriptedSession script;
  std::uint64_t scan = 0;

  session::ApplyResult run(const session::Command& c) {
    auto r = engine.apply(c);
    script.commands.push_back({c, r.outcome});
    return r;
  }
  session::ApplyResult brick(tangible::Action a, tangible::BrickType t, tangible::Cell at,
                             std::optional<tangible::Cell> from = std::nullopt) {
    return run(session::BrickCommand{{a, t, at, from, ++scan}});
  }
  bool would_create(tangible::BrickType t, tangible::Cell at) {
    auto trial = engine;
    return created(trial.apply(session::BrickCommand{{tangible::Action::Placed, t, at, std::nullopt, scan + 1}}));
  }
};

session::Scenario campaign_scenario(const session::World& world, const session::SessionConfig& cfg,
                                 std::uint64_t seed) {
  using tangible::Action;
  using tangible::BrickType;
  std::mt19937_64 rng(seed);
  const auto caps = campaign_capacities(rng);
  session::Scenario sc;
  sc.config = cfg.to_json();
  long running = 0;
  std::size_t next_cap = 0;
  const std::size_t n_sessions = world.districts().size();
  for (std::size_t k = 0; k < n_sessions; ++k) {
    const auto& d = world.districts()[k];
    Recorder rec{session::SessionEngine(world, cfg, "W" + std::to_string(k + 1), d.id, running), {}, 0};
    rec.script.session_id = rec.engine.state().session_id;
    rec.script.district_id = d.id;

    rec.run(session::Transition{session::Station::District});
    // Square focus areas stacked along the district; the table moves to the
    // next one when the current area has no free parcel left.
    const auto& b = d.bounds;
    const double side = std::min(b.max_x - b.min_x, b.max_y - b.min_y);
    int focus_index = -1;
    std::vector<tangible::Cell> anchors;
    std::vector<std::pair<tangible::Cell, int>> placed;
    auto next_focus = [&] {
      ++focus_index;
      const double y0 = b.min_y + focus_index * side;
      if (y0 + side > b.max_y + 1e-9) throw std::runtime_error("district " + d.id + " ran out of free parcels");
      if (focus_index > 0) rec.run(session::Transition{session::Station::District});
      rec.run(session::SelectFocus{{{b.min_x, y0, b.min_x + side, y0 + side}, 1000.0}});
      anchors.clear();
      for (int r = 0; r + 1 < cfg.grid.rows; r += 3) {
        for (int c = 0; c + 1 < cfg.grid.cols; c += 3) anchors.push_back({r, c});
      }
      std::shuffle(anchors.begin(), anchors.end(), rng);
      placed.clear();
    };
    auto free_anchor = [&](BrickType t) -> std::optional<tangible::Cell> {
      while (!anchors.empty()) {
        const auto a = anchors.back();
        anchors.pop_back();
        if (rec.would_create(t, a)) return a;
      }
      return std::nullopt;
    };
    next_focus();

    const std::size_t quota = (caps.size() - next_cap) / (n_sessions - k);
    bool queried = false, moved = false;
    for (std::size_t i = 0; i < quota; ++i) {
      const int cap = caps[next_cap++];
      auto at = free_anchor(BrickType::housing(cap));
      while (!at) {
        next_focus();
        at = free_anchor(BrickType::housing(cap));
      }
      rec.brick(Action::Placed, BrickType::housing(cap), *at);
      placed.emplace_back(*at, cap);
      if (!queried && placed.size() == 3) {
        // A query with the marker, then a brick tried and taken back.
        queried = true;
        rec.brick(Action::Placed, BrickType::marker(), placed[0].first);
        rec.brick(Action::Removed, BrickType::marker(), placed[0].first);
        if (const auto extra = free_anchor(BrickType::housing(500))) {
          rec.brick(Action::Placed, BrickType::housing(500), *extra);
          rec.brick(Action::Removed, BrickType::housing(500), *extra);
        }
      }
      if (!moved && placed.size() == 6) {
        // Moving a brick onto another parcel; a second brick on an occupied
        // parcel is turned down.
        moved = true;
        if (const auto to = free_anchor(BrickType::housing(placed[1].second))) {
          rec.brick(Action::Moved, BrickType::housing(placed[1].second), *to, placed[1].first);
          placed[1].first = *to;
        }
        rec.brick(Action::Placed, BrickType::housing(40), placed[3].first);
      }
    }
    const auto& some = rec.engine.state().proposals.front();
    rec.run(session::Comment{some.parcel_id, session::Stance::Pro, "close to the tram stop"});
    rec.run(session::Comment{some.parcel_id, session::Stance::Con, "playground next door"});
    rec.run(session::Transition{session::Station::District});

    running = rec.engine.state().campaign_totals + rec.engine.state().active_capacity();
    sc.sessions.push_back(std::move(rec.script));
  }
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regenerate the bundled data set"};
  fs::path out = "data";
  std::uint64_t seed = 42;
  int parcels = 1000;
  app.add_option("--out", out, "bundle directory");
  app.add_option("--seed", seed, "city and scenario seed");
  app.add_option("--parcels", parcels, "parcel count")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    citygen::CitySpec spec;
    spec.seed = seed;
    spec.n_parcels = parcels;
    spec.layers = citygen::default_layer_plans();
    citygen::write_city(citygen::generate_city(spec), out / "city");
    write_json(out / "codes.json", tangible::LookupTable::default_table().to_json());

    const auto world = session::World::load(out / "city");
    session::SessionConfig cfg;
    const auto scenario = campaign_scenario(world, cfg, seed);
    write_json(out / "scenarios" / "campaign_scale.json", session::scenario_to_json(scenario));
    const auto result = session::replay(world, cfg, scenario);
    const auto& last = result.sessions.back();
    std::cout << "campaign_scale: " << result.suggestions.size() << " suggestions, remaining "
              << last.remaining() << " (" << last.target_status() << ")\n";

    const auto campaign = screening::plant_campaign({});
    write_json(out / "campaign" / "suggestions.json", campaign.suggestions);
    json truth = json::array();
    for (const auto& v : campaign.truth) {
      truth.push_back(json{{"suggestion_id", v.suggestion_id},
                           {"outcome", screening::to_string(v.outcome)},
                           {"reason", v.reason ? json(screening::to_string(*v.reason)) : json(nullptr)},
                           {"rule", v.rule.empty() ? json(nullptr) : json(v.rule)}});
    }
    write_json(out / "campaign" / "truth.json", truth);
  } catch (const std::exception& e) {
    std::cerr << "fp-bundle: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
