#include <algorithm>
#include <cmath>

#include "findingplaces/session/session.hpp"

namespace findingplaces::session {

using nlohmann::json;
using tangible::Action;
using tangible::Cell;

namespace {

json box_json(const geo::Box& b) { return json::array({b.min_x, b.min_y, b.max_x, b.max_y}); }

ApplyResult rejected(std::string message, std::vector<StateDelta> deltas = {}) {
  return {Outcome::Rejected, std::move(message), std::move(deltas)};
}

ApplyResult protocol_error(std::string message) {
  return {Outcome::ProtocolError, std::move(message), {}};
}

long count_active(const SessionState& s) {
  return std::count_if(s.proposals.begin(), s.proposals.end(), [](const Proposal& p) {
    return p.status == ProposalStatus::Suggested;
  });
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

geo::PlanarPoint GridMapping::cell_center(Cell cell) const {
  const auto& b = extent.box;
  return {b.min_x + (cell.col + 0.5) * b.width() / grid.cols,
          b.max_y - (cell.row + 0.5) * b.height() / grid.rows};
}

long SessionState::active_capacity() const {
  long sum = 0;
  for (const auto& p : proposals) {
    if (p.status == ProposalStatus::Suggested) sum += p.capacity;
  }
  return sum;
}

std::string_view SessionState::target_status() const {
  const long r = remaining();
  return r > 0 ? "on track" : r == 0 ? "target met" : "target exceeded";
}

SessionEngine::SessionEngine(const World& world, SessionConfig cfg, std::string session_id,
                             std::string district_id, long campaign_totals)
    : world_(world), cfg_(std::move(cfg)) {
  if (!world_.district(district_id)) {
    throw SessionError("unknown district '" + district_id + "'");
  }
  if (campaign_totals < 0) {
    throw SessionError("campaign totals cannot be negative");
  }
  cfg_.grid.validate();
  state_.session_id = std::move(session_id);
  state_.district_id = std::move(district_id);
  state_.target_total = cfg_.target_total;
  state_.campaign_totals = campaign_totals;
}

ApplyResult SessionEngine::apply(const Command& cmd) {
  return std::visit(
      [this](const auto& c) -> ApplyResult {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Transition>) {
          return transition(c);
        } else if constexpr (std::is_same_v<T, SelectFocus>) {
          return select_focus(c);
        } else if constexpr (std::is_same_v<T, BrickCommand>) {
          return brick(c);
        } else {
          return comment(c);
        }
      },
      cmd);
}

ApplyResult SessionEngine::transition(const Transition& t) {
  const Station from = state_.station;
  const bool allowed = (from == Station::CityOverview && t.to == Station::District) ||
                       (from == Station::Neighborhood && t.to == Station::District);
  if (!allowed) {
    std::string msg = "transition " + std::string(to_string(from)) + " -> " +
                      std::string(to_string(t.to)) + " is not allowed";
    if (from == Station::District && t.to == Station::Neighborhood) {
      msg += "; use select_focus";
    }
    return rejected(std::move(msg));
  }
  state_.station = t.to;
  state_.focus.reset();
  state_.mapping.reset();
  ++state_.seq;
  return {Outcome::Applied, {}, {map_delta(), district_delta()}};
}

ApplyResult SessionEngine::select_focus(const SelectFocus& f) {
  if (state_.station != Station::District) {
    return rejected("select_focus needs the district station, current station is " +
                    std::string(to_string(state_.station)));
  }
  const auto& e = f.extent.box;
  if (!(std::isfinite(e.min_x) && std::isfinite(e.min_y) && std::isfinite(e.max_x) &&
        std::isfinite(e.max_y)) ||
      !(e.min_x < e.max_x && e.min_y < e.max_y)) {
    return rejected("focus extent must have min < max on both axes");
  }
  if (!(f.extent.scale_denominator > 0.0)) {
    return rejected("focus scale_denominator must be positive");
  }
  const auto& d = world_.district(state_.district_id)->bounds;
  constexpr double kSlack = 1e-9;
  std::vector<std::string> sides;
  if (e.min_x < d.min_x - kSlack) sides.emplace_back("west");
  if (e.max_x > d.max_x + kSlack) sides.emplace_back("east");
  if (e.min_y < d.min_y - kSlack) sides.emplace_back("south");
  if (e.max_y > d.max_y + kSlack) sides.emplace_back("north");
  if (!sides.empty()) {
    std::string msg = "focus extent leaves district " + state_.district_id + " on the";
    for (std::size_t i = 0; i < sides.size(); ++i) {
      msg += (i == 0 ? " " : ", ") + sides[i];
    }
    msg += " side";
    return rejected(std::move(msg));
  }
  state_.station = Station::Neighborhood;
  state_.focus = f.extent;
  state_.mapping = GridMapping{cfg_.grid, f.extent};
  ++state_.seq;
  return {Outcome::Applied, {}, {map_delta(), district_delta()}};
}

std::optional<std::string> SessionEngine::parcel_at(Cell cell) const {
  return world_.parcels().locate_point(state_.mapping->cell_center(cell));
}

Proposal* SessionEngine::active_on(std::string_view parcel_id) {
  for (auto& p : state_.proposals) {
    if (p.status == ProposalStatus::Suggested && p.parcel_id == parcel_id) return &p;
  }
  return nullptr;
}

ApplyResult SessionEngine::place_housing(const tangible::BrickEvent& ev, Cell at, bool dry_run) {
  const auto parcel = parcel_at(at);
  if (!parcel) {
    return {Outcome::Applied, "no parcel at this cell", {}};
  }
  if (const Proposal* existing = active_on(*parcel)) {
    json payload{{"kind", "rejected"},
                 {"reason", "parcel " + *parcel + " already has active proposal " + existing->id},
                 {"parcel_id", *parcel},
                 {"active_count", count_active(state_)}};
    auto r = rejected(payload["reason"].get<std::string>());
    r.deltas.push_back({Topic::Proposals, std::move(payload)});
    return r;
  }
  if (dry_run) {
    return {Outcome::Applied, {}, {}};
  }
  Proposal p;
  p.id = state_.session_id + "-" + std::to_string(state_.next_proposal++);
  p.parcel_id = *parcel;
  p.capacity = ev.brick.capacity;
  p.suitability_at_placement = world_.assessment(*parcel).suitability;
  p.created_seq = state_.seq;
  state_.proposals.push_back(p);
  ApplyResult r{Outcome::Applied, {}, {}};
  if (p.suitability_at_placement != suitability::SuitabilityClass::LowUnsuitability) {
    r.message = "parcel " + p.parcel_id + " has " +
                std::string(suitability::to_string(p.suitability_at_placement)) +
                " unsuitability";
  }
  return r;
}

ApplyResult SessionEngine::brick(const BrickCommand& b) {
  const auto& ev = b.event;
  if (state_.station != Station::Neighborhood || !state_.mapping) {
    return rejected("brick events need the neighborhood station, current station is " +
                    std::string(to_string(state_.station)));
  }
  if (ev.brick.is_housing() &&
      std::find(cfg_.denominations.begin(), cfg_.denominations.end(), ev.brick.capacity) ==
          cfg_.denominations.end()) {
    return protocol_error("capacity " + std::to_string(ev.brick.capacity) +
                          " is not a configured denomination");
  }
  const auto* code = cfg_.table.find(ev.brick);
  const int k = code ? code->k : 2;
  auto check_cell = [&](Cell c, const char* what) -> std::optional<std::string> {
    if (c.row < 0 || c.col < 0 || c.row + k > cfg_.grid.rows || c.col + k > cfg_.grid.cols) {
      return std::string(what) + " anchor (" + std::to_string(c.row) + "," +
             std::to_string(c.col) + ") is outside the " + std::to_string(cfg_.grid.rows) + "x" +
             std::to_string(cfg_.grid.cols) + " grid";
    }
    return std::nullopt;
  };
  if (auto err = check_cell(ev.at, "event")) return protocol_error(*err);
  if (ev.action == Action::Moved) {
    if (!ev.from) return protocol_error("moved event lacks 'from'");
    if (auto err = check_cell(*ev.from, "from")) return protocol_error(*err);
  }

  auto cell_json = [](Cell c) { return json::array({c.row, c.col}); };
  auto no_parcel = [&](Cell c) {
    const auto pt = state_.mapping->cell_center(c);
    return StateDelta{Topic::ParcelDetail, json{{"kind", "no_parcel"},
                                                {"cell", cell_json(c)},
                                                {"point", json::array({pt.x, pt.y})}}};
  };

  if (!ev.brick.is_housing()) {
    // Marker bricks only read.
    ++state_.seq;
    if (ev.action == Action::Removed) {
      return {Outcome::Applied, {}, {{Topic::ParcelDetail, json{{"kind", "cleared"}, {"cell", cell_json(ev.at)}}}}};
    }
    const auto parcel = parcel_at(ev.at);
    if (!parcel) {
      return {Outcome::Applied, "no parcel at this cell", {no_parcel(ev.at)}};
    }
    return {Outcome::Applied,
            {},
            {{Topic::ParcelDetail,
              json{{"kind", "detail"}, {"cell", cell_json(ev.at)}, {"detail", to_json(world_.detail(*parcel))}}}}};
  }

  auto counts = [&]() {
    std::vector<StateDelta> d;
    d.push_back(stats_delta());
    d.push_back(district_delta());
    return d;
  };
  auto withdraw_at = [&](Cell c) -> Proposal* {
    const auto parcel = parcel_at(c);
    if (!parcel) return nullptr;
    Proposal* p = active_on(*parcel);
    return p && p->capacity == ev.brick.capacity ? p : nullptr;
  };
  auto proposal_delta = [&](const char* kind, const Proposal& p) {
    return StateDelta{Topic::Proposals, json{{"kind", kind},
                                             {"proposal", to_json(p)},
                                             {"active_count", count_active(state_)}}};
  };

  switch (ev.action) {
    case Action::Placed: {
      auto probe = place_housing(ev, ev.at, true);
      if (!probe.ok()) return probe;
      ++state_.seq;
      if (!parcel_at(ev.at)) {
        return {Outcome::Applied, "no parcel at this cell", {no_parcel(ev.at)}};
      }
      auto r = place_housing(ev, ev.at, false);
      r.deltas.push_back(proposal_delta("created", state_.proposals.back()));
      for (auto& d : counts()) r.deltas.push_back(std::move(d));
      return r;
    }
    case Action::Removed: {
      ++state_.seq;
      Proposal* p = withdraw_at(ev.at);
      if (!p) {
        return {Outcome::Applied,
                "no matching active proposal",
                {{Topic::Proposals, json{{"kind", "unmatched_removal"},
                                         {"cell", cell_json(ev.at)},
                                         {"capacity", ev.brick.capacity},
                                         {"active_count", count_active(state_)}}}}};
      }
      p->status = ProposalStatus::Withdrawn;
      p->withdrawn_seq = state_.seq;
      ApplyResult r{Outcome::Applied, {}, {proposal_delta("withdrawn", *p)}};
      for (auto& d : counts()) r.deltas.push_back(std::move(d));
      return r;
    }
    case Action::Moved: {
      Proposal* old = withdraw_at(*ev.from);
      const auto target = parcel_at(ev.at);
      if (old && target && *target == old->parcel_id) {
        // Still on the same parcel.
        ++state_.seq;
        return {Outcome::Applied, {}, {}};
      }
      if (target) {
        const Proposal* existing = active_on(*target);
        if (existing && existing != old) {
          auto probe = place_housing(ev, ev.at, true);
          return probe;
        }
      }
      ++state_.seq;
      ApplyResult r{Outcome::Applied, {}, {}};
      if (old) {
        old->status = ProposalStatus::Withdrawn;
        old->withdrawn_seq = state_.seq;
        r.deltas.push_back(proposal_delta("withdrawn", *old));
      }
      if (!target) {
        r.message = "no parcel at this cell";
        r.deltas.push_back(no_parcel(ev.at));
      } else {
        auto placed = place_housing(ev, ev.at, false);
        r.message = placed.message;
        r.deltas.push_back(proposal_delta("created", state_.proposals.back()));
      }
      for (auto& d : counts()) r.deltas.push_back(std::move(d));
      return r;
    }
  }
  return protocol_error("unknown action");
}

ApplyResult SessionEngine::comment(const Comment& c) {
  if (blank(c.text)) {
    return rejected("comment text is empty");
  }
  if (!world_.parcels().find(c.parcel_id)) {
    return rejected("unknown parcel '" + c.parcel_id + "'");
  }
  ++state_.seq;
  state_.log.push_back(LogEntry{c.parcel_id, c.stance, c.text, state_.seq});
  return {Outcome::Applied,
          {},
          {{Topic::ParcelDetail, json{{"kind", "comment"}, {"entry", to_json(state_.log.back())}}}}};
}

StateDelta SessionEngine::map_delta() const {
  json payload{{"station", to_string(state_.station)}, {"district_id", state_.district_id}};
  switch (state_.station) {
    case Station::CityOverview:
      payload["extent"] = box_json(world_.parcels().bounds());
      payload["scale_denominator"] = nullptr;
      break;
    case Station::District:
      payload["extent"] = box_json(world_.district(state_.district_id)->bounds);
      payload["scale_denominator"] = cfg_.district_scale_denominator;
      break;
    case Station::Neighborhood:
      payload["extent"] = box_json(state_.focus->box);
      payload["scale_denominator"] = state_.focus->scale_denominator;
      payload["grid"] = json{{"rows", cfg_.grid.rows}, {"cols", cfg_.grid.cols}};
      break;
  }
  return {Topic::MapExtents, std::move(payload)};
}

StateDelta SessionEngine::stats_delta() const {
  return {Topic::GlobalStats,
          json{{"remaining", state_.remaining()},
               {"proposed", state_.campaign_totals + state_.active_capacity()},
               {"target", state_.target_total},
               {"status", state_.target_status()},
               {"active_proposals", count_active(state_)},
               {"session_seq", state_.seq}}};
}

StateDelta SessionEngine::district_delta() const {
  const auto* d = world_.district(state_.district_id);
  return {Topic::DistrictState,
          json{{"district_id", d->id},
               {"name", d->name},
               {"station", to_string(state_.station)},
               {"population", d->population},
               {"refugees_current", d->refugees_current},
               {"accommodation_planned", d->accommodation_planned},
               {"proposals_active", count_active(state_)},
               {"capacity_active", state_.active_capacity()}}};
}

std::vector<StateDelta> SessionEngine::snapshot() const {
  return {map_delta(), stats_delta(), district_delta()};
}

}  // namespace findingplaces::session
