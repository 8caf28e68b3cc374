#include <cstdio>

#include "findingplaces/screening/screening.hpp"

namespace findingplaces::screening {

using nlohmann::json;

std::vector<Suggestion> suggestions_from_json(const json& list) {
  if (!list.is_array()) throw std::invalid_argument("suggestions must be an array");
  std::vector<Suggestion> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    const auto where = "suggestion " + std::to_string(i);
    if (!e.is_object() || !e.contains("proposal") || !e["proposal"].is_object()) {
      throw std::invalid_argument(where + ": lacks a proposal");
    }
    if (!e.contains("detail") || !e["detail"].is_object()) {
      throw std::invalid_argument(where + ": lacks a parcel detail snapshot");
    }
    const auto& p = e["proposal"];
    const auto& d = e["detail"];
    Suggestion s;
    try {
      s.id = p.at("id").get<std::string>();
      s.parcel_id = p.at("parcel_id").get<std::string>();
      s.capacity = p.at("capacity").get<int>();
    } catch (const json::exception& ex) {
      throw std::invalid_argument(where + ": " + ex.what());
    }
    if (e.contains("attributes") && e["attributes"].is_object()) s.facts = e["attributes"];
    for (const char* key : {"area_m2", "designation", "city_owned", "regulations", "suitability", "capacity"}) {
      if (d.contains(key)) s.facts[key] = d[key];
    }
    s.facts["proposed_capacity"] = s.capacity;
    if (e.contains("district_id")) s.facts["district"] = e["district_id"];
    for (const auto& r : d.value("restrictions", json::array())) {
      if (!r.contains("layer") || !r.contains("coverage") || !r["coverage"].is_number()) {
        throw std::invalid_argument(where + ": malformed restriction entry");
      }
      s.coverage[r["layer"].get<std::string>()] = r["coverage"].get<double>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool operator==(const Verdict& a, const Verdict& b) {
  return a.suggestion_id == b.suggestion_id && a.parcel_id == b.parcel_id &&
         a.capacity == b.capacity && a.outcome == b.outcome && a.reason == b.reason &&
         a.rule == b.rule;
}

namespace {

Verdict judge(const Suggestion& s, const RuleSet& rules) {
  Verdict v{s.id, s.parcel_id, s.capacity, Outcome::FutureConsideration, std::nullopt, ""};
  for (const Stage stage : {Stage::Initial, Stage::Detailed}) {
    for (const auto& rule : rules.rules) {
      if (rule.stage != stage || !rule.when(s)) continue;
      v.outcome = stage == Stage::Initial ? Outcome::RejectedInitial : Outcome::ExcludedDetailed;
      v.reason = rule.reason;
      v.rule = rule.name;
      return v;
    }
  }
  if (rules.readiness(s)) v.outcome = Outcome::Recommended;
  return v;
}

Funnel count(const std::vector<Verdict>& verdicts) {
  Funnel f;
  f.suggested = verdicts.size();
  for (const auto& v : verdicts) {
    f.total_capacity += v.capacity;
    if (v.reason) ++f.by_reason[*v.reason];
    switch (v.outcome) {
      case Outcome::RejectedInitial: ++f.rejected_initial; break;
      case Outcome::ExcludedDetailed: ++f.excluded_detailed; break;
      case Outcome::Recommended:
        ++f.recommended;
        f.recommended_capacity += v.capacity;
        break;
      case Outcome::FutureConsideration: ++f.future; break;
    }
  }
  f.feasible = f.suggested - f.rejected_initial;
  return f;
}

Report finish(std::vector<Verdict> verdicts, const RuleSet& rules) {
  if (rules.detail_budget) {
    std::size_t taken = 0;
    for (auto& v : verdicts) {
      if (v.outcome != Outcome::Recommended) continue;
      if (++taken > *rules.detail_budget) v.outcome = Outcome::FutureConsideration;
    }
  }
  Report r;
  r.funnel = count(verdicts);
  r.verdicts = std::move(verdicts);
  return r;
}

}  // namespace

namespace serial {
Report screen(const std::vector<Suggestion>& suggestions, const RuleSet& rules) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(suggestions.size());
  for (const auto& s : suggestions) verdicts.push_back(judge(s, rules));
  return finish(std::move(verdicts), rules);
}
}  // namespace serial

namespace parallel {
Report screen(const std::vector<Suggestion>& suggestions, const RuleSet& rules) {
  std::vector<Verdict> verdicts(suggestions.size());
  const auto n = static_cast<std::ptrdiff_t>(suggestions.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) verdicts[i] = judge(suggestions[i], rules);
  return finish(std::move(verdicts), rules);
}
}  // namespace parallel

std::string summary_line(const Funnel& f) {
  return std::to_string(f.suggested) + " suggested / " + std::to_string(f.feasible) + " feasible / " +
         std::to_string(f.recommended) + " recommended / " + std::to_string(f.future) + " future";
}

json to_json(const Report& r) {
  const auto& f = r.funnel;
  json reasons = json::object();
  for (const auto& [reason, n] : f.by_reason) reasons[std::string(to_string(reason))] = n;
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back(json{{"suggestion_id", v.suggestion_id},
                            {"parcel_id", v.parcel_id},
                            {"capacity", v.capacity},
                            {"outcome", to_string(v.outcome)},
                            {"reason", v.reason ? json(to_string(*v.reason)) : json(nullptr)},
                            {"rule", v.rule.empty() ? json(nullptr) : json(v.rule)}});
  }
  return json{{"summary", summary_line(f)},
              {"funnel",
               {{"suggested", f.suggested},
                {"rejected_initial", f.rejected_initial},
                {"feasible", f.feasible},
                {"excluded_detailed", f.excluded_detailed},
                {"recommended", f.recommended},
                {"future", f.future},
                {"total_capacity", f.total_capacity},
                {"recommended_capacity", f.recommended_capacity},
                {"by_reason", reasons}}},
              {"verdicts", verdicts}};
}

Report report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("verdicts") || !j["verdicts"].is_array()) {
    throw std::invalid_argument("report must hold a 'verdicts' array");
  }
  std::vector<Verdict> verdicts;
  for (std::size_t i = 0; i < j["verdicts"].size(); ++i) {
    const auto& e = j["verdicts"][i];
    const auto where = "verdict " + std::to_string(i) + ": ";
    try {
      Verdict v;
      v.suggestion_id = e.at("suggestion_id").get<std::string>();
      v.parcel_id = e.at("parcel_id").get<std::string>();
      v.capacity = e.at("capacity").get<int>();
      const auto o = parse_outcome(e.at("outcome").get<std::string>());
      if (!o) throw std::invalid_argument(where + "unknown outcome");
      v.outcome = *o;
      if (e.contains("reason") && !e["reason"].is_null()) {
        v.reason = parse_reason(e["reason"].get<std::string>());
        if (!v.reason) throw std::invalid_argument(where + "unknown reason");
      }
      if (e.contains("rule") && !e["rule"].is_null()) v.rule = e["rule"].get<std::string>();
      const bool rejected = v.outcome == Outcome::RejectedInitial || v.outcome == Outcome::ExcludedDetailed;
      if (rejected != v.reason.has_value()) {
        throw std::invalid_argument(where + "a reason is required exactly for rejections");
      }
      verdicts.push_back(std::move(v));
    } catch (const json::exception& ex) {
      throw std::invalid_argument(where + ex.what());
    }
  }
  Report r;
  r.funnel = count(verdicts);
  r.verdicts = std::move(verdicts);
  return r;
}

std::string render_markdown(const Report& r) {
  const auto& f = r.funnel;
  std::string out = "# Screening report\n\n" + summary_line(f) + "\n";
  if (r.verdicts.empty()) return out;
  auto row = [&](const std::string& a, const std::string& b) { out += "| " + a + " | " + b + " |\n"; };
  out += "\n## Funnel\n\n| Stage | Count |\n|---|---:|\n";
  row("Suggested", std::to_string(f.suggested));
  row("Rejected in initial assessment", std::to_string(f.rejected_initial));
  row("Feasible", std::to_string(f.feasible));
  row("Excluded after detailed review", std::to_string(f.excluded_detailed));
  row("Recommended", std::to_string(f.recommended));
  row("Future consideration", std::to_string(f.future));
  out += "\nProposed capacity " + std::to_string(f.total_capacity) + ", recommended capacity " +
         std::to_string(f.recommended_capacity) + ".\n";
  if (!f.by_reason.empty()) {
    out += "\n## Reasons\n\n| Reason | Count |\n|---|---:|\n";
    for (const auto& [reason, n] : f.by_reason) row(std::string(to_string(reason)), std::to_string(n));
  }
  out += "\n## Suggestions\n\n| # | Suggestion | Parcel | Capacity | Outcome | Reason | Rule |\n"
         "|---:|---|---|---:|---|---|---|\n";
  for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
    const auto& v = r.verdicts[i];
    out += "| " + std::to_string(i + 1) + " | " + v.suggestion_id + " | " + v.parcel_id + " | " +
           std::to_string(v.capacity) + " | " + std::string(to_string(v.outcome)) + " | " +
           (v.reason ? std::string(to_string(*v.reason)) : "") + " | " + v.rule + " |\n";
  }
  return out;
}

}  // namespace findingplaces::screening
