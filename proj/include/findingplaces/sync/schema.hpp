#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "findingplaces/session/session.hpp"

namespace findingplaces::sync {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The JSON Schema keywords the topic schemas use: type, enum, required,
/// properties, additionalProperties (boolean), items, minItems, maxItems,
/// minimum, maximum, exclusiveMinimum, minLength. Anything else is refused
/// when the schema is compiled so a schema never silently validates less
/// than it says.
class Schema {
 public:
  /// Throws SchemaError on unsupported keywords.
  static Schema compile(nlohmann::json doc);

  /// First violation as "path: message", or nullopt when valid.
  std::optional<std::string> validate(const nlohmann::json& value) const;

 private:
  nlohmann::json doc_;
};

/// Schema bundled for a topic.
const Schema& topic_schema(session::Topic topic);
/// Raw schema document as shipped in schemas/.
const nlohmann::json& topic_schema_document(session::Topic topic);

}  // namespace findingplaces::sync
