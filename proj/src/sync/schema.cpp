#include "findingplaces/sync/schema.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace findingplaces::sync {

namespace embedded {
extern const std::array<std::pair<std::string_view, std::string_view>, 5> kSchemas;
}

using nlohmann::json;

namespace {

const std::set<std::string>& known_keywords() {
  static const std::set<std::string> k{
      "$schema", "title", "description", "type", "enum", "required", "properties",
      "additionalProperties", "items", "minItems", "maxItems", "minimum", "maximum",
      "exclusiveMinimum", "minLength"};
  return k;
}

void check_keywords(const json& schema, const std::string& path) {
  if (!schema.is_object()) throw SchemaError(path + ": schema must be an object");
  for (const auto& [key, value] : schema.items()) {
    if (!known_keywords().count(key)) throw SchemaError(path + ": unsupported keyword '" + key + "'");
    if (key == "additionalProperties" && !value.is_boolean()) {
      throw SchemaError(path + ": additionalProperties must be a boolean");
    }
  }
  if (schema.contains("properties")) {
    for (const auto& [name, sub] : schema["properties"].items()) {
      check_keywords(sub, path + "." + name);
    }
  }
  if (schema.contains("items")) check_keywords(schema["items"], path + "[]");
}

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

std::optional<std::string> check(const json& schema, const json& v, const std::string& path) {
  if (const auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    std::string names;
    for (const auto& t : it->is_array() ? *it : json::array({*it})) {
      ok = ok || type_matches(v, t.get<std::string>());
      names += (names.empty() ? "" : " or ") + t.get<std::string>();
    }
    if (!ok) return path + ": expected " + names;
  }
  if (const auto it = schema.find("enum"); it != schema.end()) {
    if (std::find(it->begin(), it->end(), v) == it->end()) {
      return path + ": " + v.dump() + " is not one of " + it->dump();
    }
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      return path + ": below minimum " + schema["minimum"].dump();
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
      return path + ": above maximum " + schema["maximum"].dump();
    }
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) {
      return path + ": must exceed " + schema["exclusiveMinimum"].dump();
    }
  }
  if (v.is_string() && schema.contains("minLength") &&
      v.get_ref<const std::string&>().size() < schema["minLength"].get<std::size_t>()) {
    return path + ": shorter than " + schema["minLength"].dump();
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      return path + ": fewer than " + schema["minItems"].dump() + " items";
    }
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) {
      return path + ": more than " + schema["maxItems"].dump() + " items";
    }
    if (const auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (auto err = check(*it, v[i], path + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  if (v.is_object()) {
    if (const auto it = schema.find("required"); it != schema.end()) {
      for (const auto& name : *it) {
        if (!v.contains(name.get<std::string>())) {
          return path + ": missing required field '" + name.get<std::string>() + "'";
        }
      }
    }
    const auto props = schema.find("properties");
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, value] : v.items()) {
      if (props != schema.end() && props->contains(key)) {
        if (auto err = check((*props)[key], value, path + "." + key)) return err;
      } else if (closed) {
        return path + ": unexpected field '" + key + "'";
      }
    }
  }
  return std::nullopt;
}

}  // namespace

Schema Schema::compile(json doc) {
  check_keywords(doc, "schema");
  Schema s;
  s.doc_ = std::move(doc);
  return s;
}

std::optional<std::string> Schema::validate(const json& value) const {
  return check(doc_, value, "payload");
}

namespace {

struct Bundle {
  std::array<json, 5> docs;
  std::array<Schema, 5> schemas;
};

const Bundle& bundle() {
  static const Bundle b = [] {
    Bundle out;
    for (session::Topic t : session::kAllTopics) {
      const auto i = static_cast<std::size_t>(t);
      bool found = false;
      for (const auto& [name, text] : embedded::kSchemas) {
        if (name == session::to_string(t)) {
          out.docs[i] = json::parse(text);
          out.schemas[i] = Schema::compile(out.docs[i]);
          found = true;
        }
      }
      if (!found) throw SchemaError("no schema bundled for " + std::string(session::to_string(t)));
    }
    return out;
  }();
  return b;
}

}  // namespace

const Schema& topic_schema(session::Topic topic) {
  return bundle().schemas[static_cast<std::size_t>(topic)];
}

const json& topic_schema_document(session::Topic topic) {
  return bundle().docs[static_cast<std::size_t>(topic)];
}

}  // namespace findingplaces::sync
