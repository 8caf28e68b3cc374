#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "findingplaces/citygen/citygen.hpp"
#include "findingplaces/geo/geojson.hpp"
#include "findingplaces/screening/screening.hpp"
#include "findingplaces/session/session.hpp"
#include "findingplaces/session/store.hpp"
#include "findingplaces/suitability/suitability.hpp"
#include "findingplaces/sync/hub.hpp"
#include "findingplaces/sync/server.hpp"

using namespace findingplaces;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kDomainError = 1;
constexpr int kConfigError = 2;

struct Failure : std::runtime_error {
  Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
  int code;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Failure(kConfigError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Failure(kConfigError, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure(kConfigError, "cannot write " + path.string());
}

// Settings shared by the subcommands. Precedence: flag, then FP_DATA_DIR
// (data directory only), then the config file, then defaults.
struct Settings {
  fs::path data_dir = "data/city";
  fs::path rules = "data/rules.json";
  suitability::SuitabilityConfig suitability;
  json session = json::object();
  json serve = json::object();
};

Settings load_settings(const std::string& config_path) {
  Settings s;
  if (!config_path.empty()) {
    const fs::path path(config_path);
    const json doc = read_json(path);
    if (!doc.is_object()) throw Failure(kConfigError, path.string() + ": config must be an object");
    const auto base = path.parent_path();
    auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    try {
      if (doc.contains("data_dir")) s.data_dir = rel(doc["data_dir"].get<std::string>());
      if (doc.contains("rules")) s.rules = rel(doc["rules"].get<std::string>());
      if (doc.contains("suitability")) {
        const auto& j = doc["suitability"];
        s.suitability.significance_threshold =
            j.value("significance_threshold", s.suitability.significance_threshold);
        s.suitability.density_m2_per_place = j.value("density_m2_per_place", s.suitability.density_m2_per_place);
      }
      s.session = doc.value("session", json::object());
      s.serve = doc.value("serve", json::object());
      for (const char* key : {"log", "campaign"}) {
        if (s.serve.contains(key)) s.serve[key] = rel(s.serve[key].get<std::string>()).string();
      }
    } catch (const json::exception& e) {
      throw Failure(kConfigError, path.string() + ": " + e.what());
    }
  }
  if (const char* env = std::getenv("FP_DATA_DIR"); env && *env) s.data_dir = env;
  try {
    s.suitability.validate();
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, std::string("suitability: ") + e.what());
  }
  return s;
}

session::World load_world(const Settings& s) {
  try {
    return session::World::load(s.data_dir, s.suitability);
  } catch (const std::exception& e) {
    throw Failure(kConfigError, e.what());
  }
}

session::SessionConfig session_config(const json& j) {
  try {
    return session::SessionConfig::from_json(j);
  } catch (const std::exception& e) {
    throw Failure(kConfigError, std::string("session config: ") + e.what());
  }
}

int cmd_gen_city(std::uint64_t seed, int n, int districts, const std::string& layers, const fs::path& out) {
  citygen::CitySpec spec;
  spec.seed = seed;
  spec.n_parcels = n;
  spec.n_districts = districts;
  try {
    spec.layers = layers.empty() ? citygen::default_layer_plans() : citygen::layer_plans_from_json(read_json(layers));
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, "layer spec: " + std::string(e.what()));
  }
  const auto city = citygen::generate_city(spec);
  citygen::write_city(city, out);
  std::cout << city.parcels.size() << " parcels, " << city.layers.size() << " layers, "
            << city.districts.size() << " districts written to " << out.string() << '\n';
  return 0;
}

int cmd_ingest(const fs::path& path, const std::string& out) {
  if (!fs::exists(path)) throw Failure(kConfigError, "cannot open " + path.string());
  geo::IngestResult r;
  try {
    r = geo::ingest_parcels_file(path);
  } catch (const std::exception& e) {
    throw Failure(kConfigError, e.what());
  }
  for (const auto& d : r.rejected) {
    std::cerr << "feature " << d.feature_index << (d.feature_id.empty() ? "" : " (" + d.feature_id + ")")
              << ": " << d.message << '\n';
  }
  std::cout << r.parcels.size() << " accepted, " << r.rejected.size() << " rejected\n";
  if (!out.empty()) write_text(out, geo::export_parcels(r.parcels).dump() + "\n");
  return r.rejected.empty() ? 0 : kDomainError;
}

int cmd_classify(const Settings& s, const std::string& out, bool serial) {
  const auto world = load_world(s);
  const auto rows = serial ? suitability::serial::classify_all(world.parcels(), world.layers(), s.suitability)
                           : suitability::parallel::classify_all(world.parcels(), world.layers(), s.suitability);
  const auto csv = suitability::assessments_to_csv(rows);
  std::map<std::string_view, int> counts;
  long capacity = 0;
  for (const auto& r : rows) {
    ++counts[suitability::to_string(r.suitability)];
    capacity += r.capacity;
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text(out, csv);
  }
  std::cerr << rows.size() << " parcels: " << counts["high"] << " high / " << counts["medium"] << " medium / "
            << counts["low"] << " low, capacity " << capacity << '\n';
  return 0;
}

screening::RuleSet load_rules(const fs::path& path) {
  try {
    return screening::RuleSet::from_json(read_json(path));
  } catch (const screening::RuleError& e) {
    throw Failure(kConfigError, path.string() + ": " + e.what());
  }
}

int cmd_screen(const Settings& s, std::string suggestions_path, const std::string& plant_dir,
               std::optional<std::size_t> budget, const std::string& out_dir) {
  auto rules = load_rules(s.rules);
  if (budget) rules.detail_budget = *budget;
  if (!plant_dir.empty()) {
    const auto campaign = screening::plant_campaign({});
    write_text(fs::path(plant_dir) / "suggestions.json", campaign.suggestions.dump(2) + "\n");
    suggestions_path = (fs::path(plant_dir) / "suggestions.json").string();
  }
  if (suggestions_path.empty()) throw Failure(kConfigError, "screen needs --suggestions or --plant");
  std::vector<screening::Suggestion> suggestions;
  try {
    suggestions = screening::suggestions_from_json(read_json(suggestions_path));
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, suggestions_path + ": " + e.what());
  }
  const auto report = screening::screen(suggestions, rules);
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "report.md", screening::render_markdown(report));
    write_text(fs::path(out_dir) / "report.json", screening::to_json(report).dump(2) + "\n");
  }
  std::cout << screening::summary_line(report.funnel) << '\n';
  return 0;
}

int cmd_report(const fs::path& path, const std::string& out) {
  screening::Report report;
  try {
    report = screening::report_from_json(read_json(path));
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, path.string() + ": " + e.what());
  }
  const auto md = screening::render_markdown(report);
  if (out.empty()) {
    std::cout << md;
  } else {
    write_text(out, md);
  }
  return 0;
}

int cmd_replay(const Settings& s, const fs::path& script, const std::string& out_dir) {
  session::Scenario scenario;
  try {
    if (script.extension() == ".ndjson") {
      scenario = session::scenario_from_log(session::read_session_log(script));
    } else {
      scenario = session::scenario_from_json(read_json(script));
    }
  } catch (const Failure&) {
    throw;
  } catch (const std::exception& e) {
    throw Failure(kConfigError, script.string() + ": " + e.what());
  }
  const auto world = load_world(s);
  const auto cfg = session_config(scenario.config.value_or(s.session));
  session::ReplayResult result;
  try {
    result = session::replay(world, cfg, scenario);
  } catch (const session::ReplayError& e) {
    throw Failure(kDomainError, "command " + std::to_string(e.command_index) + " of session " +
                                    std::to_string(e.session_index) + ": " + e.what());
  }
  json states = json::array();
  for (const auto& st : result.sessions) {
    states.push_back(session::state_to_json(st));
    std::cout << "session " << st.session_id << " (" << st.district_id << "): " << st.active_capacity()
              << " places proposed, remaining " << st.remaining() << ", " << st.target_status() << '\n';
  }
  std::cout << result.suggestions.size() << " suggestions\n";
  std::cout << "hash " << result.hash << '\n';
  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    write_text(dir / "suggestions.json", result.suggestions.dump(2) + "\n");
    write_text(dir / "suggestions.ndjson", session::export_ndjson(result.suggestions));
    write_text(dir / "state.json", states.dump(2) + "\n");
    write_text(dir / "hash.txt", result.hash + "\n");
  }
  return 0;
}

struct ServeFlags {
  std::string host, token, session_id, district_id, log, campaign;
  int port = -1;
  int threads = 0;
  std::size_t queue_limit = 0;
};

int cmd_serve(const Settings& s, ServeFlags f) {
  // Signals are taken synchronously by this thread; every thread started
  // below inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto& sv = s.serve;
  auto pick = [&](std::string flag, const char* key, const std::string& fallback) {
    return !flag.empty() ? flag : sv.value(key, fallback);
  };
  sync::ServerOptions opt;
  opt.host = pick(f.host, "host", opt.host);
  opt.token = pick(f.token, "token", "");
  opt.port = static_cast<std::uint16_t>(f.port >= 0 ? f.port : sv.value("port", 0));
  opt.threads = f.threads > 0 ? f.threads : sv.value("threads", opt.threads);
  opt.queue_limit = f.queue_limit > 0 ? f.queue_limit : sv.value("queue_limit", opt.queue_limit);
  const auto session_id = pick(f.session_id, "session_id", "S1");
  const auto district_id = pick(f.district_id, "district_id", "D1");
  const fs::path log_path = pick(f.log, "log", "logs/" + session_id + ".ndjson");
  const fs::path campaign_path = pick(f.campaign, "campaign", "logs/campaign.json");

  const auto world = load_world(s);
  std::optional<session::SessionLog> prior;
  if (fs::exists(log_path) && fs::file_size(log_path) > 0) {
    try {
      prior = session::read_session_log(log_path);
    } catch (const std::exception& e) {
      throw Failure(kConfigError, e.what());
    }
    if (prior->header.value("session_id", "") != session_id) {
      throw Failure(kConfigError, log_path.string() + " belongs to another session");
    }
  }
  const auto cfg = session_config(prior ? prior->header.value("config", json()) : s.session);
  std::optional<session::CampaignStore> campaign;
  try {
    campaign.emplace(campaign_path);
  } catch (const std::exception& e) {
    throw Failure(kConfigError, e.what());
  }
  const long totals = prior ? prior->header.value("campaign_totals", 0L) : campaign->total_excluding(session_id);

  std::optional<session::SessionEngine> engine;
  try {
    engine.emplace(world, cfg, session_id, prior ? prior->header.value("district_id", "") : district_id, totals);
  } catch (const session::SessionError& e) {
    throw Failure(kConfigError, e.what());
  }
  std::size_t index = 0;
  if (prior) {
    for (const auto& c : prior->commands) {
      const auto r = engine->apply(c.command);
      if (r.outcome != c.expect) {
        throw Failure(kDomainError, log_path.string() + ": resumed log diverges at command " + std::to_string(index));
      }
      ++index;
    }
  }
  sync::Hub hub;
  std::optional<session::SessionLogWriter> writer;

  std::mutex mu;
  auto handler = [&](const json& frame) -> json {
    const auto cmd = session::command_from_json(frame);  // malformed -> error reply
    std::lock_guard lock(mu);
    const auto r = engine->apply(cmd);
    writer->append(index++, cmd, r.outcome);
    for (const auto& d : r.deltas) hub.publish(d.topic, d.payload);
    if (r.ok()) campaign->record(session_id, engine->state().active_capacity());
    return json{{"ok", r.ok()},
                {"op", "command"},
                {"outcome", session::to_string(r.outcome)},
                {"message", r.message},
                {"seq", engine->state().seq}};
  };

  std::optional<sync::Server> server;
  try {
    server.emplace(hub, opt, handler);
  } catch (const std::exception& e) {
    throw Failure(kConfigError, e.what());
  }
  // Bound: only now touch the log, so a failed start leaves no file behind.
  try {
    writer.emplace(log_path, session::log_header(engine->state(), cfg));
  } catch (const std::exception& e) {
    throw Failure(kConfigError, e.what());
  }
  for (const auto& d : engine->snapshot()) hub.publish(d.topic, d.payload);
  server->start();
  std::cout << "listening on " << opt.host << ":" << server->port() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  server->stop();
  std::lock_guard lock(mu);
  writer->flush();
  campaign->record(session_id, engine->state().active_capacity());
  std::cout << "stopped on signal " << sig << ", " << index << " commands logged to " << log_path.string()
            << "\nhash " << session::state_hash(engine->state()) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fp: siting workshop tools"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string data_flag;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--data", data_flag, "data directory (overrides FP_DATA_DIR and config)");

  std::function<int(const Settings&)> action;

  auto* gen = app.add_subcommand("gen-city", "generate a synthetic city with its ground-truth ledger");
  std::uint64_t seed = 42;
  int n_parcels = 1000, n_districts = 7;
  std::string layers, gen_out;
  gen->add_option("--seed", seed);
  gen->add_option("--parcels", n_parcels)->check(CLI::PositiveNumber);
  gen->add_option("--districts", n_districts)->check(CLI::PositiveNumber);
  gen->add_option("--layers", layers, "layer plan JSON");
  gen->add_option("--out", gen_out)->required();
  gen->callback([&] { action = [&](const Settings&) { return cmd_gen_city(seed, n_parcels, n_districts, layers, gen_out); }; });

  auto* ingest = app.add_subcommand("ingest", "validate a parcel GeoJSON file");
  std::string ingest_in, ingest_out;
  ingest->add_option("file", ingest_in)->required();
  ingest->add_option("--out", ingest_out, "write the accepted parcels as planar GeoJSON");
  ingest->callback([&] { action = [&](const Settings&) { return cmd_ingest(ingest_in, ingest_out); }; });

  auto* classify = app.add_subcommand("classify", "suitability class and capacity per parcel (CSV)");
  std::string classify_out;
  bool classify_serial = false;
  classify->add_option("--out", classify_out);
  classify->add_flag("--serial", classify_serial, "use the single-threaded kernel");
  classify->callback([&] { action = [&](const Settings& s) { return cmd_classify(s, classify_out, classify_serial); }; });

  auto* screen = app.add_subcommand("screen", "run the feasibility screening over suggestions");
  std::string suggestions, plant_dir, rules_flag, screen_out;
  std::optional<std::size_t> budget;
  screen->add_option("--suggestions", suggestions, "suggestion export (JSON array)");
  screen->add_option("--plant", plant_dir, "write the planted campaign here and screen it");
  screen->add_option("--rules", rules_flag, "rules JSON");
  screen->add_option("--budget", budget, "cap on recommended suggestions");
  screen->add_option("--out", screen_out, "directory for report.md and report.json");
  screen->callback([&] {
    action = [&](const Settings& s) {
      Settings local = s;
      if (!rules_flag.empty()) local.rules = rules_flag;
      return cmd_screen(local, suggestions, plant_dir, budget, screen_out);
    };
  });

  auto* report = app.add_subcommand("report", "render a screening report JSON as Markdown");
  std::string report_in, report_out;
  report->add_option("file", report_in)->required();
  report->add_option("--out", report_out);
  report->callback([&] { action = [&](const Settings&) { return cmd_report(report_in, report_out); }; });

  auto* replay = app.add_subcommand("replay", "run a scenario (.json) or session log (.ndjson) headless");
  std::string script, replay_out;
  replay->add_option("script", script)->required();
  replay->add_option("--out", replay_out, "directory for exports, state and hash");
  replay->callback([&] { action = [&](const Settings& s) { return cmd_replay(s, script, replay_out); }; });

  auto* serve = app.add_subcommand("serve", "run the hub and one session engine until SIGINT/SIGTERM");
  ServeFlags sf;
  serve->add_option("--host", sf.host);
  serve->add_option("--port", sf.port);
  serve->add_option("--token", sf.token);
  serve->add_option("--session", sf.session_id);
  serve->add_option("--district", sf.district_id);
  serve->add_option("--log", sf.log, "session log (NDJSON); resumed when it exists");
  serve->add_option("--campaign", sf.campaign, "campaign totals file");
  serve->add_option("--threads", sf.threads);
  serve->add_option("--queue-limit", sf.queue_limit);
  serve->callback([&] { action = [&](const Settings& s) { return cmd_serve(s, sf); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    Settings settings = load_settings(config_path);
    if (!data_flag.empty()) settings.data_dir = data_flag;
    return action(settings);
  } catch (const Failure& e) {
    std::cerr << "fp: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "fp: " << e.what() << '\n';
    return kConfigError;
  }
}
