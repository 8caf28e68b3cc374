#include <algorithm>
#include <fstream>

#include "findingplaces/tangible/tangible.hpp"

namespace findingplaces::tangible {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Color, std::string_view>, 7> kColorNames{{
    {Color::Red, "red"},
    {Color::Green, "green"},
    {Color::Blue, "blue"},
    {Color::Yellow, "yellow"},
    {Color::Black, "black"},
    {Color::White, "white"},
    {Color::Neutral, "neutral"},
}};

std::vector<Color> pattern_of(std::initializer_list<Color> cells) { return cells; }

}  // namespace

std::string_view to_string(Color c) {
  for (const auto& [color, name] : kColorNames) {
    if (color == c) return name;
  }
  return "neutral";
}

std::optional<Color> parse_color(std::string_view s) {
  for (const auto& [color, name] : kColorNames) {
    if (name == s) return color;
  }
  return std::nullopt;
}

Rgb palette_rgb(Color c) {
  switch (c) {
    case Color::Red: return {255, 0, 0};
    case Color::Green: return {0, 255, 0};
    case Color::Blue: return {0, 0, 255};
    case Color::Yellow: return {255, 255, 0};
    case Color::Black: return {0, 0, 0};
    case Color::White:
    case Color::Neutral: return {255, 255, 255};
  }
  return {255, 255, 255};
}

void GridSpec::validate() const {
  if (rows < 4 || cols < 4 || rows % 2 != 0 || cols % 2 != 0) {
    throw std::invalid_argument("grid rows and cols must be even and at least 4");
  }
  if (cell_px < 1) {
    throw std::invalid_argument("cell_px must be positive");
  }
}

CellFrame CellFrame::blank(int rows, int cols, std::uint64_t scan_seq) {
  CellFrame f;
  f.rows = rows;
  f.cols = cols;
  f.scan_seq = scan_seq;
  f.cells.assign(static_cast<std::size_t>(rows) * cols, Color::Neutral);
  return f;
}

std::string to_string(const BrickType& t) {
  return t.is_housing() ? "housing-" + std::to_string(t.capacity) : "marker";
}

json to_json(const BrickType& t) {
  if (t.is_housing()) {
    return json{{"type", "housing"}, {"capacity", t.capacity}};
  }
  return json{{"type", "marker"}};
}

BrickType brick_type_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw std::invalid_argument("brick needs a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  if (type == "marker") {
    return BrickType::marker();
  }
  if (type == "housing") {
    if (!j.contains("capacity") || !j["capacity"].is_number_integer()) {
      throw std::invalid_argument("housing brick needs an integer 'capacity'");
    }
    return BrickType::housing(j["capacity"].get<int>());
  }
  throw std::invalid_argument("unknown brick type '" + type + "'");
}

std::vector<Color> rotate_pattern(const std::vector<Color>& pattern, int k) {
  std::vector<Color> out(pattern.size());
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      // (r, c) -> (c, k-1-r)
      out[static_cast<std::size_t>(c) * k + (k - 1 - r)] = pattern[static_cast<std::size_t>(r) * k + c];
    }
  }
  return out;
}

LookupTable LookupTable::create(std::vector<BrickCode> codes) {
  if (codes.empty()) {
    throw TableError("lookup table is empty");
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto& code = codes[i];
    const std::string label = to_string(code.type);
    if (code.k != 1 && code.k != 2) {
      throw TableError(label + ": code size must be 1 or 2");
    }
    if (code.pattern.size() != static_cast<std::size_t>(code.k * code.k)) {
      throw TableError(label + ": pattern must hold k*k cells");
    }
    for (Color c : code.pattern) {
      if (c == Color::Neutral || c == Color::White) {
        throw TableError(label + ": pattern may not contain " + std::string(to_string(c)));
      }
    }
    if (code.type.is_housing() && (code.type.capacity < 40 || code.type.capacity > 1500)) {
      throw TableError(label + ": capacity outside [40, 1500]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (codes[j].type == code.type) {
        throw TableError("duplicate code for " + label);
      }
      if (codes[j].k != code.k) continue;
      auto rotated = code.pattern;
      for (int turn = 0; turn < 4; ++turn) {
        if (rotated == codes[j].pattern) {
          throw TableError(label + " collides with " + to_string(codes[j].type) +
                           " under rotation");
        }
        rotated = rotate_pattern(rotated, code.k);
      }
    }
  }
  LookupTable t;
  t.codes_ = std::move(codes);
  return t;
}

LookupTable LookupTable::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("codes") || !doc["codes"].is_array()) {
    throw TableError("lookup table must hold a 'codes' array");
  }
  std::vector<BrickCode> codes;
  for (const auto& item : doc["codes"]) {
    BrickCode code;
    try {
      code.type = brick_type_from_json(item.value("brick", json{}));
    } catch (const std::invalid_argument& e) {
      throw TableError(e.what());
    }
    const auto& rows = item.value("pattern", json{});
    if (!rows.is_array() || rows.empty()) {
      throw TableError(to_string(code.type) + ": pattern must be an array of rows");
    }
    code.k = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != rows.size()) {
        throw TableError(to_string(code.type) + ": pattern must be square");
      }
      for (const auto& cell : row) {
        const auto c = cell.is_string() ? parse_color(cell.get<std::string>()) : std::nullopt;
        if (!c) {
          throw TableError(to_string(code.type) + ": unknown color " + cell.dump());
        }
        code.pattern.push_back(*c);
      }
    }
    codes.push_back(std::move(code));
  }
  return create(std::move(codes));
}

LookupTable LookupTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return from_json(json::parse(in));
}

LookupTable LookupTable::default_table() {
  using enum Color;
  const auto& d = default_denominations();
  return create({
      {2, pattern_of({Red, Red, Red, Red}), BrickType::marker()},
      {2, pattern_of({Blue, Yellow, Yellow, Yellow}), BrickType::housing(d[0])},
      {2, pattern_of({Blue, Blue, Yellow, Yellow}), BrickType::housing(d[1])},
      {2, pattern_of({Blue, Yellow, Yellow, Blue}), BrickType::housing(d[2])},
      {2, pattern_of({Green, Blue, Blue, Blue}), BrickType::housing(d[3])},
      {2, pattern_of({Green, Green, Blue, Blue}), BrickType::housing(d[4])},
      {2, pattern_of({Black, Yellow, Yellow, Black}), BrickType::housing(d[5])},
  });
}

json LookupTable::to_json() const {
  json codes = json::array();
  for (const auto& code : codes_) {
    json rows = json::array();
    for (int r = 0; r < code.k; ++r) {
      json row = json::array();
      for (int c = 0; c < code.k; ++c) {
        row.push_back(std::string(to_string(code.pattern[static_cast<std::size_t>(r) * code.k + c])));
      }
      rows.push_back(row);
    }
    codes.push_back(json{{"brick", tangible::to_json(code.type)}, {"pattern", rows}});
  }
  return json{{"codes", codes}};
}

const BrickCode* LookupTable::find(const BrickType& t) const {
  const auto it = std::find_if(codes_.begin(), codes_.end(),
                               [&](const BrickCode& c) { return c.type == t; });
  return it == codes_.end() ? nullptr : &*it;
}

std::optional<BrickType> LookupTable::match(const std::vector<Color>& pattern, int k) const {
  for (const auto& code : codes_) {
    if (code.k != k) continue;
    auto rotated = code.pattern;
    for (int turn = 0; turn < 4; ++turn) {
      if (rotated == pattern) return code.type;
      rotated = rotate_pattern(rotated, k);
    }
  }
  return std::nullopt;
}

}  // namespace findingplaces::tangible
