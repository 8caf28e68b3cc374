#include <algorithm>
#include <fstream>

#include "findingplaces/screening/screening.hpp"

namespace findingplaces::screening {

using nlohmann::json;

std::string_view to_string(Stage s) { return s == Stage::Initial ? "initial" : "detailed"; }

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::OtherLandUse: return "other_land_use";
    case Reason::DirectUseConflict: return "direct_use_conflict";
    case Reason::TechnicalStructural: return "technical_structural";
  }
  return "other_land_use";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::RejectedInitial: return "rejected_initial";
    case Outcome::ExcludedDetailed: return "excluded_detailed";
    case Outcome::Recommended: return "recommended";
    case Outcome::FutureConsideration: return "future_consideration";
  }
  return "future_consideration";
}

std::string_view to_string(AttrType t) {
  switch (t) {
    case AttrType::Number: return "number";
    case AttrType::String: return "string";
    case AttrType::Boolean: return "boolean";
    case AttrType::StringList: return "string_list";
  }
  return "number";
}

std::optional<Reason> parse_reason(std::string_view s) {
  for (Reason r : {Reason::OtherLandUse, Reason::DirectUseConflict, Reason::TechnicalStructural}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : {Outcome::RejectedInitial, Outcome::ExcludedDetailed, Outcome::Recommended,
                    Outcome::FutureConsideration}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

namespace {

std::optional<AttrType> parse_type(std::string_view s) {
  for (AttrType t : {AttrType::Number, AttrType::String, AttrType::Boolean, AttrType::StringList}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In, Contains };

std::optional<Op> parse_op(std::string_view s) {
  static const std::pair<std::string_view, Op> table[] = {
      {"==", Op::Eq}, {"!=", Op::Ne}, {"<", Op::Lt},  {"<=", Op::Le},
      {">", Op::Gt},  {">=", Op::Ge}, {"in", Op::In}, {"contains", Op::Contains}};
  for (const auto& [name, op] : table) {
    if (name == s) return op;
  }
  return std::nullopt;
}

bool is_ordering(Op op) { return op == Op::Lt || op == Op::Le || op == Op::Gt || op == Op::Ge; }

bool value_has_type(const json& v, AttrType t) {
  switch (t) {
    case AttrType::Number: return v.is_number();
    case AttrType::String: return v.is_string();
    case AttrType::Boolean: return v.is_boolean();
    case AttrType::StringList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
  }
  return false;
}

bool compare(double a, Op op, double b) {
  switch (op) {
    case Op::Eq: return a == b;
    case Op::Ne: return a != b;
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::Gt: return a > b;
    case Op::Ge: return a >= b;
    default: return false;
  }
}

}  // namespace

struct Predicate::Node {
  enum class Kind { True, All, Any, Not, Attr, Coverage } kind = Kind::True;
  std::vector<std::shared_ptr<const Node>> kids;
  std::string name;
  AttrType type = AttrType::Number;
  Op op = Op::Eq;
  json value;

  bool eval(const Suggestion& s) const {
    switch (kind) {
      case Kind::True: return true;
      case Kind::All:
        return std::all_of(kids.begin(), kids.end(), [&](const auto& k) { return k->eval(s); });
      case Kind::Any:
        return std::any_of(kids.begin(), kids.end(), [&](const auto& k) { return k->eval(s); });
      case Kind::Not: return !kids.front()->eval(s);
      case Kind::Coverage: {
        double f = 0.0;
        if (name == "*") {
          for (const auto& [_, c] : s.coverage) f = std::max(f, c);
        } else if (const auto it = s.coverage.find(name); it != s.coverage.end()) {
          f = it->second;
        }
        return compare(f, op, value.get<double>());
      }
      case Kind::Attr: {
        const auto it = s.facts.find(name);
        if (it == s.facts.end() || !value_has_type(*it, type)) return false;
        const json& fact = *it;
        if (op == Op::In) {
          return std::any_of(value.begin(), value.end(), [&](const json& v) {
            return type == AttrType::Number ? fact.get<double>() == v.get<double>() : fact == v;
          });
        }
        if (op == Op::Contains) {
          return std::find(fact.begin(), fact.end(), value) != fact.end();
        }
        if (type == AttrType::Number) return compare(fact.get<double>(), op, value.get<double>());
        return op == Op::Eq ? fact == value : fact != value;
      }
    }
    return false;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Predicate::Node>;

NodePtr compile_node(const json& j, const std::map<std::string, AttrType>& attrs,
                     const std::optional<std::vector<std::string>>& layers, const std::string& where) {
  using Kind = Predicate::Node::Kind;
  auto fail = [&](const std::string& msg) -> NodePtr { throw RuleError(where + ": " + msg); };
  if (!j.is_object() || j.size() == 0) return fail("predicate must be a non-empty object");
  auto node = std::make_shared<Predicate::Node>();
  for (const char* key : {"all", "any"}) {
    if (!j.contains(key)) continue;
    if (j.size() != 1) return fail(std::string("'") + key + "' takes no sibling keys");
    const auto& list = j[key];
    if (!list.is_array() || list.empty()) return fail(std::string("'") + key + "' needs a non-empty array");
    node->kind = std::string_view(key) == "all" ? Kind::All : Kind::Any;
    for (std::size_t i = 0; i < list.size(); ++i) {
      node->kids.push_back(compile_node(list[i], attrs, layers, where + "." + key + "[" + std::to_string(i) + "]"));
    }
    return node;
  }
  if (j.contains("not")) {
    if (j.size() != 1) return fail("'not' takes no sibling keys");
    node->kind = Kind::Not;
    node->kids.push_back(compile_node(j["not"], attrs, layers, where + ".not"));
    return node;
  }
  if (!j.contains("op") || !j["op"].is_string()) return fail("comparison lacks a string 'op'");
  const auto op = parse_op(j["op"].get<std::string>());
  if (!op) return fail("unknown op '" + j["op"].get<std::string>() + "'");
  if (!j.contains("value")) return fail("comparison lacks 'value'");
  node->op = *op;
  node->value = j["value"];
  if (j.contains("coverage")) {
    if (j.size() != 3 || !j["coverage"].is_string()) return fail("malformed coverage comparison");
    node->kind = Kind::Coverage;
    node->name = j["coverage"].get<std::string>();
    if (node->name != "*" && layers &&
        std::find(layers->begin(), layers->end(), node->name) == layers->end()) {
      return fail("unknown layer '" + node->name + "'");
    }
    if (*op == Op::In || *op == Op::Contains) return fail("coverage supports numeric comparisons only");
    if (!node->value.is_number()) return fail("coverage threshold must be a number");
    return node;
  }
  if (!j.contains("attr") || !j["attr"].is_string() || j.size() != 3) {
    return fail("comparison needs exactly 'attr' (or 'coverage'), 'op' and 'value'");
  }
  node->kind = Kind::Attr;
  node->name = j["attr"].get<std::string>();
  const auto it = attrs.find(node->name);
  if (it == attrs.end()) return fail("unknown attribute '" + node->name + "'");
  node->type = it->second;
  const auto type_name = std::string(to_string(node->type));
  switch (*op) {
    case Op::In:
      if (node->type != AttrType::Number && node->type != AttrType::String) {
        return fail("'in' needs a number or string attribute");
      }
      if (!node->value.is_array() ||
          !std::all_of(node->value.begin(), node->value.end(),
                       [&](const json& v) { return value_has_type(v, node->type); })) {
        return fail("'in' needs an array of " + type_name + " values");
      }
      break;
    case Op::Contains:
      if (node->type != AttrType::StringList) return fail("'contains' needs a string_list attribute");
      if (!node->value.is_string()) return fail("'contains' needs a string value");
      break;
    default:
      if (is_ordering(*op) && node->type != AttrType::Number) {
        return fail("ordering comparison on " + type_name + " attribute '" + node->name + "'");
      }
      if (node->type == AttrType::StringList) return fail("string_list supports 'contains' only");
      if (!value_has_type(node->value, node->type)) {
        return fail("value for '" + node->name + "' must be " + type_name);
      }
  }
  return node;
}

}  // namespace

Predicate::Predicate() : root_(std::make_shared<Node>()), source_(json::object()) {}

Predicate Predicate::compile(const json& j, const std::map<std::string, AttrType>& attrs,
                             const std::optional<std::vector<std::string>>& layers,
                             const std::string& where) {
  Predicate p;
  p.root_ = compile_node(j, attrs, layers, where);
  p.source_ = j;
  return p;
}

bool Predicate::operator()(const Suggestion& s) const { return root_->eval(s); }

std::map<std::string, AttrType> builtin_attributes() {
  return {{"area_m2", AttrType::Number},       {"designation", AttrType::String},
          {"city_owned", AttrType::Boolean},   {"regulations", AttrType::StringList},
          {"suitability", AttrType::String},   {"capacity", AttrType::Number},
          {"proposed_capacity", AttrType::Number}, {"district", AttrType::String}};
}

RuleSet RuleSet::from_json(const json& j) {
  if (!j.is_object()) throw RuleError("rules document must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "attributes" && key != "layers" && key != "rules" && key != "readiness" &&
        key != "detail_budget") {
      throw RuleError("unknown rules key '" + key + "'");
    }
  }
  RuleSet rs;
  if (j.contains("attributes")) {
    if (!j["attributes"].is_object()) throw RuleError("'attributes' must map names to types");
    for (const auto& [name, t] : j["attributes"].items()) {
      const auto type = t.is_string() ? parse_type(t.get<std::string>()) : std::nullopt;
      if (!type) throw RuleError("attribute '" + name + "': unknown type " + t.dump());
      const auto [it, fresh] = rs.attributes.emplace(name, *type);
      if (!fresh && it->second != *type) {
        throw RuleError("attribute '" + name + "' is built in as " + std::string(to_string(it->second)));
      }
    }
  }
  if (j.contains("layers")) {
    if (!j["layers"].is_array() ||
        !std::all_of(j["layers"].begin(), j["layers"].end(), [](const json& v) { return v.is_string(); })) {
      throw RuleError("'layers' must be an array of names");
    }
    rs.layers = j["layers"].get<std::vector<std::string>>();
  }
  if (!j.contains("rules") || !j["rules"].is_array()) throw RuleError("'rules' must be an array");
  bool detailed_seen = false;
  for (std::size_t i = 0; i < j["rules"].size(); ++i) {
    const auto& r = j["rules"][i];
    const auto where = "rule " + std::to_string(i);
    if (!r.is_object() || !r.contains("name") || !r["name"].is_string()) {
      throw RuleError(where + ": needs a string 'name'");
    }
    Rule rule;
    rule.name = r["name"].get<std::string>();
    const auto named = "rule '" + rule.name + "'";
    if (std::any_of(rs.rules.begin(), rs.rules.end(), [&](const Rule& o) { return o.name == rule.name; })) {
      throw RuleError(named + ": duplicate name");
    }
    const auto stage = r.value("stage", "");
    if (stage == "initial") {
      if (detailed_seen) throw RuleError(named + ": initial rule after a detailed rule");
      rule.stage = Stage::Initial;
    } else if (stage == "detailed") {
      detailed_seen = true;
      rule.stage = Stage::Detailed;
    } else {
      throw RuleError(named + ": stage must be initial or detailed");
    }
    const auto reason = r.contains("reason") && r["reason"].is_string()
                            ? parse_reason(r["reason"].get<std::string>())
                            : std::nullopt;
    if (!reason) throw RuleError(named + ": reason must be other_land_use, direct_use_conflict or technical_structural");
    rule.reason = *reason;
    if (!r.contains("when")) throw RuleError(named + ": lacks 'when'");
    rule.when = Predicate::compile(r["when"], rs.attributes, rs.layers, named);
    rs.rules.push_back(std::move(rule));
  }
  if (j.contains("readiness")) {
    rs.readiness = Predicate::compile(j["readiness"], rs.attributes, rs.layers, "readiness");
  }
  if (j.contains("detail_budget") && !j["detail_budget"].is_null()) {
    if (!j["detail_budget"].is_number_unsigned()) throw RuleError("'detail_budget' must be a non-negative integer");
    rs.detail_budget = j["detail_budget"].get<std::size_t>();
  }
  return rs;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json RuleSet::to_json() const {
  const auto builtins = builtin_attributes();
  json attrs = json::object();
  for (const auto& [name, t] : attributes) {
    if (!builtins.count(name)) attrs[name] = to_string(t);
  }
  json rules_j = json::array();
  for (const auto& r : rules) {
    rules_j.push_back(json{{"name", r.name},
                           {"stage", to_string(r.stage)},
                           {"reason", to_string(r.reason)},
                           {"when", r.when.source()}});
  }
  json j{{"attributes", attrs}, {"rules", rules_j}};
  if (layers) j["layers"] = *layers;
  if (!readiness.source().empty()) j["readiness"] = readiness.source();
  if (detail_budget) j["detail_budget"] = *detail_budget;
  return j;
}

}  // namespace findingplaces::screening
