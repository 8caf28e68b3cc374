#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace findingplaces::screening {

enum class Stage { Initial, Detailed };
enum class Reason { OtherLandUse, DirectUseConflict, TechnicalStructural };
enum class Outcome { RejectedInitial, ExcludedDetailed, Recommended, FutureConsideration };
enum class AttrType { Number, String, Boolean, StringList };

std::string_view to_string(Stage s);
std::string_view to_string(Reason r);
std::string_view to_string(Outcome o);
std::string_view to_string(AttrType t);
std::optional<Reason> parse_reason(std::string_view s);
std::optional<Outcome> parse_outcome(std::string_view s);

/// Raised while validating rules, before anything is screened.
class RuleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One suggested parcel as the screening sees it. `facts` is a flat object
/// of attribute values; `coverage` maps layer name to covered fraction.
struct Suggestion {
  std::string id;
  std::string parcel_id;
  int capacity = 0;
  nlohmann::json facts = nlohmann::json::object();
  std::map<std::string, double> coverage;
};

/// Accepts the suggestion export (objects with proposal, detail and
/// optional attributes/district_id). Throws std::invalid_argument naming
/// the offending entry when the detail snapshot is missing.
std::vector<Suggestion> suggestions_from_json(const nlohmann::json& list);

/// Compiled declarative predicate:
///   {"attr": name, "op": op, "value": v}
///   {"coverage": layer | "*", "op": op, "value": number}
///   {"all": [...]}, {"any": [...]}, {"not": p}
/// Ops: == != < <= > >= in contains. A missing fact never matches a
/// comparison.
class Predicate {
 public:
  Predicate();
  static Predicate compile(const nlohmann::json& j, const std::map<std::string, AttrType>& attrs,
                           const std::optional<std::vector<std::string>>& layers,
                           const std::string& where);
  bool operator()(const Suggestion& s) const;
  const nlohmann::json& source() const { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  nlohmann::json source_;
};

struct Rule {
  std::string name;
  Stage stage = Stage::Initial;
  Reason reason = Reason::OtherLandUse;
  Predicate when;
};

std::map<std::string, AttrType> builtin_attributes();

/// Rules document:
///   {"attributes": {name: type}, "layers": [...], "rules": [...],
///    "readiness": predicate, "detail_budget": n}
/// Initial-stage rules must precede Detailed-stage rules.
struct RuleSet {
  std::map<std::string, AttrType> attributes = builtin_attributes();
  std::optional<std::vector<std::string>> layers;
  std::vector<Rule> rules;
  Predicate readiness;
  /// Caps the Recommended set; later ready survivors become future.
  std::optional<std::size_t> detail_budget;

  static RuleSet from_json(const nlohmann::json& j);
  static RuleSet load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct Verdict {
  std::string suggestion_id;
  std::string parcel_id;
  int capacity = 0;
  Outcome outcome = Outcome::FutureConsideration;
  std::optional<Reason> reason;
  std::string rule;
};

bool operator==(const Verdict& a, const Verdict& b);

struct Funnel {
  std::size_t suggested = 0;
  std::size_t rejected_initial = 0;
  std::size_t feasible = 0;
  std::size_t excluded_detailed = 0;
  std::size_t recommended = 0;
  std::size_t future = 0;
  long total_capacity = 0;
  long recommended_capacity = 0;
  std::map<Reason, std::size_t> by_reason;
};

struct Report {
  std::vector<Verdict> verdicts;  // input order
  Funnel funnel;
};

namespace serial {
Report screen(const std::vector<Suggestion>& suggestions, const RuleSet& rules);
}
namespace parallel {
Report screen(const std::vector<Suggestion>& suggestions, const RuleSet& rules);
}
inline Report screen(const std::vector<Suggestion>& suggestions, const RuleSet& rules) {
  return parallel::screen(suggestions, rules);
}

/// "N suggested / F feasible / R recommended / U future"
std::string summary_line(const Funnel& f);
nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string render_markdown(const Report& r);

/// Synthetic campaign whose outcomes are fixed by construction against the
/// bundled rule semantics (data/rules.json).
struct PlantSpec {
  std::size_t rejected_initial = 117;
  std::size_t excluded_detailed = 24;
  std::size_t recommended = 6;
  std::size_t future = 14;
  std::uint64_t seed = 42;
};

struct PlantedCampaign {
  nlohmann::json suggestions;  // export format
  std::vector<Verdict> truth;  // same order
};

PlantedCampaign plant_campaign(const PlantSpec& spec);

}  // namespace findingplaces::screening
