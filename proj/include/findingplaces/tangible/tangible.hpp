#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace findingplaces::tangible {

/// Cell labels. White is the table canvas, so it always reads as Neutral and
/// may not appear in a code pattern.
enum class Color : std::uint8_t { Red, Green, Blue, Yellow, Black, White, Neutral };

std::string_view to_string(Color c);
std::optional<Color> parse_color(std::string_view s);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb palette_rgb(Color c);

struct GridSpec {
  int rows = 32;
  int cols = 32;
  int cell_px = 8;

  /// Throws std::invalid_argument.
  void validate() const;
  int quadrant_rows() const { return rows / 2; }
  int quadrant_cols() const { return cols / 2; }
  int width_px() const { return cols * cell_px; }
  int height_px() const { return rows * cell_px; }
  GridSpec quadrant() const { return {rows / 2, cols / 2, cell_px}; }
};

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellFrame {
  int rows = 0;
  int cols = 0;
  std::uint64_t scan_seq = 0;
  std::vector<Color> cells;  // row-major

  static CellFrame blank(int rows, int cols, std::uint64_t scan_seq = 0);
  Color at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  Color& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  friend bool operator==(const CellFrame&, const CellFrame&) = default;
};

struct BrickType {
  enum class Kind : std::uint8_t { Marker, Housing };
  Kind kind = Kind::Marker;
  int capacity = 0;  // places; 0 for markers

  static BrickType marker() { return {Kind::Marker, 0}; }
  static BrickType housing(int places) { return {Kind::Housing, places}; }
  bool is_housing() const { return kind == Kind::Housing; }
  friend auto operator<=>(const BrickType&, const BrickType&) = default;
};

/// "marker" or "housing-<capacity>"
std::string to_string(const BrickType& t);
nlohmann::json to_json(const BrickType& t);
BrickType brick_type_from_json(const nlohmann::json& j);

inline const std::vector<int>& default_denominations() {
  static const std::vector<int> d{40, 100, 250, 500, 1000, 1500};
  return d;
}

struct BrickCode {
  int k = 2;
  std::vector<Color> pattern;  // k×k, row-major
  BrickType type;
};

/// Pattern turned 90° clockwise.
std::vector<Color> rotate_pattern(const std::vector<Color>& pattern, int k);

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validated lookup table: k ∈ {1,2}, patterns free of Neutral and White,
/// no pattern equal to any rotation of another, one code per brick type,
/// housing capacities within [40, 1500].
class LookupTable {
 public:
  static LookupTable create(std::vector<BrickCode> codes);
  static LookupTable from_json(const nlohmann::json& doc);
  static LookupTable load(const std::filesystem::path& path);
  /// Marker plus one 2×2 code per default denomination.
  static LookupTable default_table();

  nlohmann::json to_json() const;
  const std::vector<BrickCode>& codes() const { return codes_; }
  const BrickCode* find(const BrickType& t) const;
  /// Brick type whose pattern equals `pattern` under some rotation.
  std::optional<BrickType> match(const std::vector<Color>& pattern, int k) const;

 private:
  std::vector<BrickCode> codes_;
};

struct Detection {
  BrickType type;
  Cell anchor;  // top-left of the footprint
  int k = 2;
  friend auto operator<=>(const Detection&, const Detection&) = default;
};

struct UnknownShape {
  Cell top_left;  // of the bounding box
  int rows = 0;
  int cols = 0;
  int cells = 0;
  std::string reason;
};

struct DecodeResult {
  std::vector<Detection> detections;  // sorted by anchor
  std::vector<UnknownShape> unknown;
};

/// Each 4-connected non-Neutral region that is a full k×k square matching a
/// table code under rotation becomes one detection; anything else becomes an
/// unknown-shape diagnostic. Bricks therefore must not touch edge to edge.
DecodeResult decode(const CellFrame& frame, const LookupTable& table);

enum class Action : std::uint8_t { Placed, Removed, Moved };
std::string_view to_string(Action a);

struct BrickEvent {
  Action action = Action::Placed;
  BrickType brick;
  Cell at;
  std::optional<Cell> from;  // Moved only
  std::uint64_t scan_seq = 0;
  friend bool operator==(const BrickEvent&, const BrickEvent&) = default;
};

nlohmann::json to_json(const BrickEvent& e);
/// Throws std::invalid_argument on malformed records.
BrickEvent brick_event_from_json(const nlohmann::json& j);

/// Removed, then Moved, then Placed; each group by anchor. A removal and an
/// appearance of the same type pair greedily by Manhattan distance.
std::vector<BrickEvent> diff_scans(const std::vector<Detection>& prev,
                                   const std::vector<Detection>& curr, std::uint64_t scan_seq);

/// Inverse of diff_scans, for checking reconstructions.
std::vector<Detection> apply_events(std::vector<Detection> state,
                                    const std::vector<BrickEvent>& events,
                                    const LookupTable& table);

class TornScanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrants in TL, TR, BL, BR order.
CellFrame compose_quadrants(const std::array<CellFrame, 4>& q, const GridSpec& spec);
std::array<CellFrame, 4> split_quadrants(const CellFrame& frame);

/// Whole frame turned 90° clockwise (square grids): (r, c) -> (c, rows-1-r).
CellFrame rotate_frame(const CellFrame& frame);
/// Where a k×k footprint anchored at `a` lands after rotate_frame.
Cell rotate_anchor(Cell a, int k, int rows);

/// Newline-delimited JSON event log.
void append_events(std::ostream& out, const std::vector<BrickEvent>& events);
std::vector<BrickEvent> read_events(std::istream& in);

}  // namespace findingplaces::tangible
