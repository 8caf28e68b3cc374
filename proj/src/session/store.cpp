#include "findingplaces/session/store.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <sstream>

namespace findingplaces::session {

using nlohmann::json;

namespace {

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : {Outcome::Applied, Outcome::Rejected, Outcome::ProtocolError}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

ScriptedCommand scripted_from_json(const json& j) {
  ScriptedCommand sc{command_from_json(j), Outcome::Applied};
  if (j.contains("expect")) {
    const auto o = j["expect"].is_string() ? parse_outcome(j["expect"].get<std::string>()) : std::nullopt;
    if (!o) throw std::invalid_argument("'expect' must be applied, rejected or protocol_error");
    sc.expect = *o;
  }
  return sc;
}

}  // namespace

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("sessions") || !doc["sessions"].is_array()) {
    throw std::invalid_argument("scenario must hold a 'sessions' array");
  }
  Scenario s;
  if (doc.contains("config")) s.config = doc["config"];
  std::size_t si = 0;
  for (const auto& item : doc["sessions"]) {
    ScriptedSession session;
    try {
      session.session_id = item.at("session_id").get<std::string>();
      session.district_id = item.at("district_id").get<std::string>();
      if (item.contains("campaign_totals")) session.campaign_totals = item["campaign_totals"].get<long>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("session " + std::to_string(si) + ": " + e.what());
    }
    std::size_t ci = 0;
    for (const auto& cmd : item.value("commands", json::array())) {
      try {
        session.commands.push_back(scripted_from_json(cmd));
      } catch (const std::exception& e) {
        throw std::invalid_argument("session " + std::to_string(si) + " command " +
                                    std::to_string(ci) + ": " + e.what());
      }
      ++ci;
    }
    s.sessions.push_back(std::move(session));
    ++si;
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json sessions = json::array();
  for (const auto& session : s.sessions) {
    json cmds = json::array();
    for (const auto& c : session.commands) {
      json j = to_json(c.command);
      if (c.expect != Outcome::Applied) j["expect"] = to_string(c.expect);
      cmds.push_back(std::move(j));
    }
    json item{{"session_id", session.session_id},
              {"district_id", session.district_id},
              {"commands", cmds}};
    if (session.campaign_totals) item["campaign_totals"] = *session.campaign_totals;
    sessions.push_back(std::move(item));
  }
  json doc{{"sessions", sessions}};
  if (s.config) doc["config"] = *s.config;
  return doc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

ReplayResult replay(const World& world, const SessionConfig& cfg, const Scenario& scenario,
                    const StepHook& hook) {
  ReplayResult out;
  long running = 0;
  std::string joined;
  for (std::size_t si = 0; si < scenario.sessions.size(); ++si) {
    const auto& script = scenario.sessions[si];
    std::optional<SessionEngine> engine;
    try {
      engine.emplace(world, cfg, script.session_id, script.district_id,
                     script.campaign_totals.value_or(running));
    } catch (const SessionError& e) {
      throw ReplayError(si, 0, "session " + script.session_id + ": " + e.what());
    }
    for (std::size_t ci = 0; ci < script.commands.size(); ++ci) {
      const auto& sc = script.commands[ci];
      const auto r = engine->apply(sc.command);
      if (hook) hook(*engine, r, si, ci);
      if (r.outcome != sc.expect) {
        throw ReplayError(si, ci,
                          "session " + script.session_id + " command " + std::to_string(ci) +
                              " (" + to_json(sc.command).value("cmd", "") + "): expected " +
                              std::string(to_string(sc.expect)) + ", got " +
                              std::string(to_string(r.outcome)) +
                              (r.message.empty() ? "" : ": " + r.message));
      }
    }
    const auto& state = engine->state();
    running = state.campaign_totals + state.active_capacity();
    for (auto& s : export_suggestions(state, world)) out.suggestions.push_back(std::move(s));
    joined += state_hash(state);
    joined += '\n';
    out.sessions.push_back(state);
  }
  if (out.sessions.size() == 1) {
    out.hash = state_hash(out.sessions.front());
  } else {
    out.hash = sha256_hex(joined);
  }
  return out;
}

json log_header(const SessionState& s, const SessionConfig& cfg) {
  return json{{"type", "header"},
              {"session_id", s.session_id},
              {"district_id", s.district_id},
              {"campaign_totals", s.campaign_totals},
              {"config", cfg.to_json()},
              {"ts", now_ms()}};
}

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path, const json& header)
    : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool existing = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (existing) {
    const auto prior = read_session_log(path);
    if (prior.header.value("session_id", "") != header.value("session_id", "")) {
      throw std::runtime_error(path.string() + " belongs to another session");
    }
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) throw std::runtime_error("cannot open " + path.string() + " for append");
  if (!existing) {
    const auto line = header.dump() + "\n";
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fflush(file_);
  }
}

SessionLogWriter::~SessionLogWriter() {
  if (file_) std::fclose(file_);
}

void SessionLogWriter::append(std::size_t index, const Command& cmd, Outcome outcome) {
  const json line{{"type", "command"},
                  {"index", index},
                  {"command", to_json(cmd)},
                  {"outcome", to_string(outcome)},
                  {"ts", now_ms()}};
  const auto text = line.dump() + "\n";
  std::fwrite(text.data(), 1, text.size(), file_);
  std::fflush(file_);
}

void SessionLogWriter::flush() {
  if (file_) std::fflush(file_);
}

SessionLog read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  SessionLog log;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool torn = nl == std::string::npos;
    const std::string line = text.substr(pos, torn ? std::string::npos : nl - pos);
    pos = torn ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      if (torn) break;
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": not JSON");
    }
    const auto type = j.value("type", "");
    if (line_no == 1) {
      if (type != "header") throw std::runtime_error(path.string() + ": missing header line");
      log.header = std::move(j);
      continue;
    }
    if (type != "command") {
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                               ": unexpected record type '" + type + "'");
    }
    ScriptedCommand sc{command_from_json(j.at("command")), Outcome::Applied};
    const auto o = parse_outcome(j.value("outcome", "applied"));
    if (!o) throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": bad outcome");
    sc.expect = *o;
    log.commands.push_back(std::move(sc));
  }
  if (log.header.is_null()) throw std::runtime_error(path.string() + ": empty log");
  return log;
}

Scenario scenario_from_log(const SessionLog& log) {
  Scenario s;
  s.config = log.header.value("config", json());
  ScriptedSession session;
  session.session_id = log.header.value("session_id", "");
  session.district_id = log.header.value("district_id", "");
  session.campaign_totals = log.header.value("campaign_totals", 0L);
  session.commands = log.commands;
  s.sessions.push_back(std::move(session));
  return s;
}

CampaignStore::CampaignStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path_.string() + ": " + e.what());
  }
  sessions_ = doc.value("sessions", std::map<std::string, long>{});
}

long CampaignStore::total_excluding(const std::string& session_id) const {
  long sum = 0;
  for (const auto& [id, total] : sessions_) {
    if (id != session_id) sum += total;
  }
  return sum;
}

void CampaignStore::record(const std::string& session_id, long suggested) {
  sessions_[session_id] = suggested;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << json{{"sessions", sessions_}}.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path_);
}

}  // namespace findingplaces::session
