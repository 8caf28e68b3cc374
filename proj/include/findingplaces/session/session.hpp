#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "findingplaces/geo/districts.hpp"
#include "findingplaces/geo/parcels.hpp"
#include "findingplaces/suitability/suitability.hpp"
#include "findingplaces/tangible/tangible.hpp"

namespace findingplaces::session {

enum class Station : std::uint8_t { CityOverview, District, Neighborhood };
std::string_view to_string(Station s);
std::optional<Station> parse_station(std::string_view s);

/// Display topics shared with the sync hub.
enum class Topic : std::uint8_t { MapExtents, GlobalStats, DistrictState, Proposals, ParcelDetail };
inline constexpr std::array<Topic, 5> kAllTopics{Topic::MapExtents, Topic::GlobalStats,
                                                 Topic::DistrictState, Topic::Proposals,
                                                 Topic::ParcelDetail};
std::string_view to_string(Topic t);
std::optional<Topic> parse_topic(std::string_view s);

struct MapExtent {
  geo::Box box;
  double scale_denominator = 750.0;
  friend bool operator==(const MapExtent&, const MapExtent&) = default;
};

/// Grid cells laid linearly over an extent; row 0 is the northern edge.
struct GridMapping {
  tangible::GridSpec grid;
  MapExtent extent;
  geo::PlanarPoint cell_center(tangible::Cell cell) const;
};

enum class ProposalStatus : std::uint8_t { Suggested, Withdrawn };
enum class Stance : std::uint8_t { Pro, Con };
std::string_view to_string(Stance s);
std::optional<Stance> parse_stance(std::string_view s);

struct Proposal {
  std::string id;
  std::string parcel_id;
  int capacity = 0;
  suitability::SuitabilityClass suitability_at_placement =
      suitability::SuitabilityClass::LowUnsuitability;
  std::uint64_t created_seq = 0;
  ProposalStatus status = ProposalStatus::Suggested;
  std::optional<std::uint64_t> withdrawn_seq;
};

struct LogEntry {
  std::string parcel_id;
  Stance stance = Stance::Pro;
  std::string text;
  std::uint64_t created_seq = 0;
};

struct ParcelDetail {
  std::string parcel_id;
  double area_m2 = 0.0;
  std::string designation;
  bool city_owned = false;
  std::vector<std::string> regulations;
  std::vector<std::pair<std::string, double>> restrictions;  // layer, coverage
  suitability::SuitabilityClass suitability = suitability::SuitabilityClass::LowUnsuitability;
  int capacity = 0;
};

/// Everything a session reads: parcels, layers, districts and the
/// precomputed assessments.
class World {
 public:
  World(geo::ParcelSet parcels, std::vector<geo::RestrictionLayer> layers,
        std::vector<geo::District> districts, suitability::SuitabilityConfig cfg);

  /// Reads parcels.geojson, layers/*.geojson (by file name) and
  /// districts.json from `dir`. Throws on missing or invalid data.
  static World load(const std::filesystem::path& dir, suitability::SuitabilityConfig cfg = {});

  const geo::ParcelSet& parcels() const { return parcels_; }
  const std::vector<geo::RestrictionLayer>& layers() const { return layers_; }
  const std::vector<geo::District>& districts() const { return districts_; }
  const geo::District* district(std::string_view id) const;
  const suitability::SuitabilityAssessment& assessment(std::string_view parcel_id) const;
  const suitability::SuitabilityConfig& suitability_config() const { return cfg_; }
  ParcelDetail detail(std::string_view parcel_id) const;

 private:
  geo::ParcelSet parcels_;
  std::vector<geo::RestrictionLayer> layers_;
  std::vector<geo::District> districts_;
  suitability::SuitabilityConfig cfg_;
  std::map<std::string, suitability::SuitabilityAssessment, std::less<>> assessments_;
};

struct SessionConfig {
  int target_total = 20'000;
  std::vector<int> denominations = tangible::default_denominations();
  tangible::GridSpec grid;
  double district_scale_denominator = 750.0;
  /// Brick footprint sizes come from here.
  tangible::LookupTable table = tangible::LookupTable::default_table();

  static SessionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SessionState {
  std::string session_id;
  std::string district_id;
  Station station = Station::CityOverview;
  std::optional<MapExtent> focus;
  std::optional<GridMapping> mapping;
  std::vector<Proposal> proposals;
  int target_total = 20'000;
  /// Suggested capacity of earlier sessions in the campaign.
  long campaign_totals = 0;
  std::vector<LogEntry> log;
  std::uint64_t seq = 0;
  int next_proposal = 1;

  long active_capacity() const;
  long remaining() const { return target_total - campaign_totals - active_capacity(); }
  /// "on track", "target met" or "target exceeded".
  std::string_view target_status() const;
};

// Commands a session accepts, in the order a log records them.
struct Transition {
  Station to;
};
struct SelectFocus {
  MapExtent extent;
};
struct BrickCommand {
  tangible::BrickEvent event;
};
struct Comment {
  std::string parcel_id;
  Stance stance = Stance::Pro;
  std::string text;
};
using Command = std::variant<Transition, SelectFocus, BrickCommand, Comment>;

nlohmann::json to_json(const Command& c);
/// Throws std::invalid_argument naming the offending field.
Command command_from_json(const nlohmann::json& j);

struct StateDelta {
  Topic topic;
  nlohmann::json payload;
};

enum class Outcome : std::uint8_t { Applied, Rejected, ProtocolError };
std::string_view to_string(Outcome o);

struct ApplyResult {
  Outcome outcome = Outcome::Applied;
  std::string message;
  std::vector<StateDelta> deltas;
  bool ok() const { return outcome == Outcome::Applied; }
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single writer over one SessionState.
class SessionEngine {
 public:
  /// Throws SessionError for an unknown district.
  SessionEngine(const World& world, SessionConfig cfg, std::string session_id,
                std::string district_id, long campaign_totals);

  ApplyResult apply(const Command& cmd);
  const SessionState& state() const { return state_; }
  const SessionConfig& config() const { return cfg_; }
  const World& world() const { return world_; }
  /// Current value of every display topic, for late joiners.
  std::vector<StateDelta> snapshot() const;

 private:
  ApplyResult transition(const Transition& t);
  ApplyResult select_focus(const SelectFocus& f);
  ApplyResult brick(const BrickCommand& b);
  ApplyResult comment(const Comment& c);
  ApplyResult place_housing(const tangible::BrickEvent& ev, tangible::Cell at, bool dry_run);
  std::optional<std::string> parcel_at(tangible::Cell cell) const;
  Proposal* active_on(std::string_view parcel_id);

  StateDelta map_delta() const;
  StateDelta stats_delta() const;
  StateDelta district_delta() const;

  const World& world_;
  SessionConfig cfg_;
  SessionState state_;
};

nlohmann::json to_json(const ParcelDetail& d);
nlohmann::json to_json(const Proposal& p);
nlohmann::json to_json(const LogEntry& e);

/// Canonical serialization without wall-clock fields.
nlohmann::json state_to_json(const SessionState& s);
/// SHA-256 hex of the canonical serialization.
std::string state_hash(const SessionState& s);

/// Suggested proposals with detail snapshots and their comments, by
/// created_seq.
nlohmann::json export_suggestions(const SessionState& s, const World& world);
/// One suggestion per line.
std::string export_ndjson(const nlohmann::json& suggestions);

}  // namespace findingplaces::session
