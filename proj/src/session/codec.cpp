#include <algorithm>
#include <map>

#include "findingplaces/session/session.hpp"
#include "findingplaces/session/store.hpp"

namespace findingplaces::session {

using nlohmann::json;

std::string_view to_string(Station s) {
  switch (s) {
    case Station::CityOverview: return "city_overview";
    case Station::District: return "district";
    case Station::Neighborhood: return "neighborhood";
  }
  return "city_overview";
}

std::optional<Station> parse_station(std::string_view s) {
  if (s == "city_overview") return Station::CityOverview;
  if (s == "district") return Station::District;
  if (s == "neighborhood") return Station::Neighborhood;
  return std::nullopt;
}

std::string_view to_string(Topic t) {
  switch (t) {
    case Topic::MapExtents: return "map_extents";
    case Topic::GlobalStats: return "global_stats";
    case Topic::DistrictState: return "district_state";
    case Topic::Proposals: return "proposals";
    case Topic::ParcelDetail: return "parcel_detail";
  }
  return "map_extents";
}

std::optional<Topic> parse_topic(std::string_view s) {
  for (Topic t : kAllTopics) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(Stance s) { return s == Stance::Pro ? "pro" : "con"; }

std::optional<Stance> parse_stance(std::string_view s) {
  if (s == "pro") return Stance::Pro;
  if (s == "con") return Stance::Con;
  return std::nullopt;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Applied: return "applied";
    case Outcome::Rejected: return "rejected";
    case Outcome::ProtocolError: return "protocol_error";
  }
  return "applied";
}

namespace {

geo::Box box_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 4 ||
      !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); })) {
    throw std::invalid_argument(std::string("'") + field + "' must be [minx, miny, maxx, maxy]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::string string_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw std::invalid_argument(std::string("'") + field + "' must be a string");
  }
  return j[field].get<std::string>();
}

}  // namespace

json to_json(const Command& c) {
  return std::visit(
      [](const auto& cmd) -> json {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, Transition>) {
          return json{{"cmd", "transition"}, {"to", to_string(cmd.to)}};
        } else if constexpr (std::is_same_v<T, SelectFocus>) {
          const auto& b = cmd.extent.box;
          return json{{"cmd", "select_focus"},
                      {"extent", {b.min_x, b.min_y, b.max_x, b.max_y}},
                      {"scale_denominator", cmd.extent.scale_denominator}};
        } else if constexpr (std::is_same_v<T, BrickCommand>) {
          return json{{"cmd", "brick"}, {"event", tangible::to_json(cmd.event)}};
        } else {
          return json{{"cmd", "comment"},
                      {"parcel_id", cmd.parcel_id},
                      {"stance", to_string(cmd.stance)},
                      {"text", cmd.text}};
        }
      },
      c);
}

Command command_from_json(const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("command must be an object");
  }
  const auto cmd = string_field(j, "cmd");
  if (cmd == "transition") {
    const auto to = parse_station(string_field(j, "to"));
    if (!to) throw std::invalid_argument("'to' must name a station");
    return Transition{*to};
  }
  if (cmd == "select_focus") {
    MapExtent e;
    e.box = box_from_json(j.value("extent", json{}), "extent");
    if (j.contains("scale_denominator")) {
      if (!j["scale_denominator"].is_number()) {
        throw std::invalid_argument("'scale_denominator' must be a number");
      }
      e.scale_denominator = j["scale_denominator"].get<double>();
    }
    return SelectFocus{e};
  }
  if (cmd == "brick") {
    if (!j.contains("event")) throw std::invalid_argument("brick command lacks 'event'");
    return BrickCommand{tangible::brick_event_from_json(j["event"])};
  }
  if (cmd == "comment") {
    const auto stance = parse_stance(string_field(j, "stance"));
    if (!stance) throw std::invalid_argument("'stance' must be pro or con");
    return Comment{string_field(j, "parcel_id"), *stance, string_field(j, "text")};
  }
  throw std::invalid_argument("unknown command '" + cmd + "'");
}

SessionConfig SessionConfig::from_json(const json& j) {
  SessionConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw std::invalid_argument("session config must be an object");
  cfg.target_total = j.value("target_total", cfg.target_total);
  if (cfg.target_total <= 0) throw std::invalid_argument("target_total must be positive");
  if (j.contains("denominations")) {
    cfg.denominations = j["denominations"].get<std::vector<int>>();
    if (cfg.denominations.empty()) throw std::invalid_argument("denominations must not be empty");
    for (int d : cfg.denominations) {
      if (d < 40 || d > 1500) {
        throw std::invalid_argument("denomination " + std::to_string(d) + " outside [40, 1500]");
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    cfg.grid.rows = g.value("rows", cfg.grid.rows);
    cfg.grid.cols = g.value("cols", cfg.grid.cols);
    cfg.grid.cell_px = g.value("cell_px", cfg.grid.cell_px);
  }
  cfg.grid.validate();
  cfg.district_scale_denominator = j.value("district_scale_denominator", cfg.district_scale_denominator);
  if (j.contains("table")) {
    cfg.table = tangible::LookupTable::from_json(j["table"]);
  }
  for (int d : cfg.denominations) {
    if (!cfg.table.find(tangible::BrickType::housing(d))) {
      throw std::invalid_argument("lookup table has no code for housing-" + std::to_string(d));
    }
  }
  return cfg;
}

json SessionConfig::to_json() const {
  return json{{"target_total", target_total},
              {"denominations", denominations},
              {"grid", {{"rows", grid.rows}, {"cols", grid.cols}, {"cell_px", grid.cell_px}}},
              {"district_scale_denominator", district_scale_denominator},
              {"table", table.to_json()}};
}

json to_json(const Proposal& p) {
  json j{{"id", p.id},
         {"parcel_id", p.parcel_id},
         {"capacity", p.capacity},
         {"suitability_at_placement", suitability::to_string(p.suitability_at_placement)},
         {"created_seq", p.created_seq},
         {"status", p.status == ProposalStatus::Suggested ? "suggested" : "withdrawn"}};
  j["withdrawn_seq"] = p.withdrawn_seq ? json(*p.withdrawn_seq) : json(nullptr);
  return j;
}

json to_json(const LogEntry& e) {
  return json{{"parcel_id", e.parcel_id},
              {"stance", to_string(e.stance)},
              {"text", e.text},
              {"created_seq", e.created_seq}};
}

json state_to_json(const SessionState& s) {
  json proposals = json::array();
  for (const auto& p : s.proposals) proposals.push_back(to_json(p));
  json log = json::array();
  for (const auto& e : s.log) log.push_back(to_json(e));
  json focus = nullptr;
  if (s.focus) {
    const auto& b = s.focus->box;
    focus = json{{"extent", {b.min_x, b.min_y, b.max_x, b.max_y}},
                 {"scale_denominator", s.focus->scale_denominator}};
  }
  return json{{"session_id", s.session_id},
              {"district_id", s.district_id},
              {"station", to_string(s.station)},
              {"focus", focus},
              {"target_total", s.target_total},
              {"campaign_totals", s.campaign_totals},
              {"remaining", s.remaining()},
              {"status", s.target_status()},
              {"seq", s.seq},
              {"next_proposal", s.next_proposal},
              {"proposals", proposals},
              {"log", log}};
}

std::string state_hash(const SessionState& s) {
  // nlohmann objects keep keys sorted, so dump() is canonical.
  return sha256_hex(state_to_json(s).dump());
}

json export_suggestions(const SessionState& s, const World& world) {
  std::map<std::string, std::vector<const LogEntry*>> comments;
  for (const auto& e : s.log) comments[e.parcel_id].push_back(&e);
  std::vector<const Proposal*> active;
  for (const auto& p : s.proposals) {
    if (p.status == ProposalStatus::Suggested) active.push_back(&p);
  }
  std::stable_sort(active.begin(), active.end(), [](const Proposal* a, const Proposal* b) {
    return a->created_seq < b->created_seq;
  });
  json out = json::array();
  for (const Proposal* p : active) {
    json entries = json::array();
    if (const auto it = comments.find(p->parcel_id); it != comments.end()) {
      for (const LogEntry* e : it->second) entries.push_back(to_json(*e));
    }
    out.push_back(json{{"session_id", s.session_id},
                       {"district_id", s.district_id},
                       {"proposal", to_json(*p)},
                       {"detail", to_json(world.detail(p->parcel_id))},
                       {"attributes", world.parcels().at(p->parcel_id).attributes},
                       {"comments", entries}});
  }
  return out;
}

std::string export_ndjson(const json& suggestions) {
  std::string out;
  for (const auto& s : suggestions) {
    out += s.dump();
    out += '\n';
  }
  return out;
}

}  // namespace findingplaces::session
