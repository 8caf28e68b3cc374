#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "findingplaces/session/session.hpp"

namespace findingplaces::session {

struct ScriptedCommand {
  Command command;
  /// What the engine must answer; scripts expect Applied unless stated.
  Outcome expect = Outcome::Applied;
};

struct ScriptedSession {
  std::string session_id;
  std::string district_id;
  /// Fixed prior total; when absent the running campaign sum is used.
  std::optional<long> campaign_totals;
  std::vector<ScriptedCommand> commands;
};

/// Ordered sessions of one campaign plus the engine configuration.
struct Scenario {
  std::optional<nlohmann::json> config;
  std::vector<ScriptedSession> sessions;
};

/// Throws std::invalid_argument with the failing session/command position.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t session, std::size_t command, const std::string& what)
      : std::runtime_error(what), session_index(session), command_index(command) {}
  std::size_t session_index;
  std::size_t command_index;
};

struct ReplayResult {
  std::vector<SessionState> sessions;
  nlohmann::json suggestions = nlohmann::json::array();
  /// state_hash of a single session, or SHA-256 over the per-session hashes.
  std::string hash;
};

using StepHook = std::function<void(const SessionEngine&, const ApplyResult&, std::size_t session,
                                    std::size_t command)>;

/// Runs every session headless. Throws ReplayError when an outcome differs
/// from the scripted expectation.
ReplayResult replay(const World& world, const SessionConfig& cfg, const Scenario& scenario,
                    const StepHook& hook = {});

std::string sha256_hex(std::string_view data);

/// Append-only session log: one header line, then one line per command as
/// the engine answered it. Every line is flushed as it is written.
class SessionLogWriter {
 public:
  /// Creates the file, or appends to an existing log of the same session.
  SessionLogWriter(const std::filesystem::path& path, const nlohmann::json& header);
  ~SessionLogWriter();
  SessionLogWriter(const SessionLogWriter&) = delete;
  SessionLogWriter& operator=(const SessionLogWriter&) = delete;

  void append(std::size_t index, const Command& cmd, Outcome outcome);
  void flush();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

struct SessionLog {
  nlohmann::json header;
  std::vector<ScriptedCommand> commands;
};

/// A torn final line (no newline, unparsable) is ignored.
SessionLog read_session_log(const std::filesystem::path& path);

/// Single-session scenario reproducing a captured log.
Scenario scenario_from_log(const SessionLog& log);

/// Header line for a fresh session log.
nlohmann::json log_header(const SessionState& s, const SessionConfig& cfg);

/// Suggested capacity per finished or running session of a campaign.
class CampaignStore {
 public:
  explicit CampaignStore(std::filesystem::path path);
  long total_excluding(const std::string& session_id) const;
  void record(const std::string& session_id, long suggested);
  const std::map<std::string, long>& sessions() const { return sessions_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, long> sessions_;
};

std::int64_t now_ms();

}  // namespace findingplaces::session
