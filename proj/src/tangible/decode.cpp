#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "findingplaces/tangible/tangible.hpp"

namespace findingplaces::tangible {

using nlohmann::json;

DecodeResult decode(const CellFrame& frame, const LookupTable& table) {
  DecodeResult out;
  std::vector<char> seen(frame.cells.size(), 0);
  std::vector<Cell> stack;
  std::vector<Cell> region;
  for (int r0 = 0; r0 < frame.rows; ++r0) {
    for (int c0 = 0; c0 < frame.cols; ++c0) {
      const auto idx0 = static_cast<std::size_t>(r0) * frame.cols + c0;
      if (seen[idx0] || frame.cells[idx0] == Color::Neutral) continue;
      // Flood the 4-connected region.
      region.clear();
      stack.assign(1, Cell{r0, c0});
      seen[idx0] = 1;
      int min_r = r0, max_r = r0, min_c = c0, max_c = c0;
      while (!stack.empty()) {
        const Cell cell = stack.back();
        stack.pop_back();
        region.push_back(cell);
        min_r = std::min(min_r, cell.row);
        max_r = std::max(max_r, cell.row);
        min_c = std::min(min_c, cell.col);
        max_c = std::max(max_c, cell.col);
        constexpr int dr[] = {-1, 1, 0, 0};
        constexpr int dc[] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int r = cell.row + dr[d];
          const int c = cell.col + dc[d];
          if (r < 0 || c < 0 || r >= frame.rows || c >= frame.cols) continue;
          const auto idx = static_cast<std::size_t>(r) * frame.cols + c;
          if (seen[idx] || frame.cells[idx] == Color::Neutral) continue;
          seen[idx] = 1;
          stack.push_back({r, c});
        }
      }
      const int h = max_r - min_r + 1;
      const int w = max_c - min_c + 1;
      const int n = static_cast<int>(region.size());
      UnknownShape unknown{{min_r, min_c}, h, w, n, {}};
      if (h != w || n != h * w || h > 2) {
        unknown.reason = "region is not a 1x1 or 2x2 square";
        out.unknown.push_back(std::move(unknown));
        continue;
      }
      std::vector<Color> pattern;
      for (int r = min_r; r <= max_r; ++r) {
        for (int c = min_c; c <= max_c; ++c) {
          pattern.push_back(frame.at(r, c));
        }
      }
      if (const auto type = table.match(pattern, h)) {
        out.detections.push_back(Detection{*type, {min_r, min_c}, h});
      } else {
        unknown.reason = "pattern not in lookup table";
        out.unknown.push_back(std::move(unknown));
      }
    }
  }
  std::sort(out.detections.begin(), out.detections.end(),
            [](const Detection& a, const Detection& b) {
              return std::tie(a.anchor, a.type) < std::tie(b.anchor, b.type);
            });
  return out;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Placed: return "placed";
    case Action::Removed: return "removed";
    case Action::Moved: return "moved";
  }
  return "placed";
}

json to_json(const BrickEvent& e) {
  json j{{"action", to_string(e.action)},
         {"brick", to_json(e.brick)},
         {"at", {e.at.row, e.at.col}},
         {"scan_seq", e.scan_seq}};
  if (e.from) {
    j["from"] = {e.from->row, e.from->col};
  }
  return j;
}

namespace {

Cell cell_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw std::invalid_argument(std::string("'") + field + "' must be [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

}  // namespace

BrickEvent brick_event_from_json(const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("brick event must be an object");
  }
  BrickEvent e;
  const auto action = j.value("action", std::string{});
  if (action == "placed") {
    e.action = Action::Placed;
  } else if (action == "removed") {
    e.action = Action::Removed;
  } else if (action == "moved") {
    e.action = Action::Moved;
  } else {
    throw std::invalid_argument("unknown action '" + action + "'");
  }
  e.brick = brick_type_from_json(j.value("brick", json{}));
  e.at = cell_from_json(j.value("at", json{}), "at");
  if (j.contains("from")) {
    e.from = cell_from_json(j["from"], "from");
  }
  if (e.action == Action::Moved && !e.from) {
    throw std::invalid_argument("moved event needs 'from'");
  }
  if (e.action != Action::Moved && e.from) {
    throw std::invalid_argument("only moved events carry 'from'");
  }
  const auto& seq = j.value("scan_seq", json(0));
  if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<long long>() >= 0)) {
    throw std::invalid_argument("'scan_seq' must be a non-negative integer");
  }
  e.scan_seq = seq.get<std::uint64_t>();
  return e;
}

std::vector<BrickEvent> diff_scans(const std::vector<Detection>& prev,
                                   const std::vector<Detection>& curr, std::uint64_t scan_seq) {
  auto key = [](const Detection& d) { return std::tie(d.type, d.anchor); };
  auto less = [&](const Detection& a, const Detection& b) { return key(a) < key(b); };
  auto p = prev;
  auto c = curr;
  std::sort(p.begin(), p.end(), less);
  std::sort(c.begin(), c.end(), less);
  std::vector<Detection> gone;
  std::vector<Detection> fresh;
  std::set_difference(p.begin(), p.end(), c.begin(), c.end(), std::back_inserter(gone), less);
  std::set_difference(c.begin(), c.end(), p.begin(), p.end(), std::back_inserter(fresh), less);

  struct Pair {
    int dist;
    Cell from;
    Cell to;
    std::size_t gi;
    std::size_t fi;
  };
  std::vector<Pair> pairs;
  for (std::size_t gi = 0; gi < gone.size(); ++gi) {
    for (std::size_t fi = 0; fi < fresh.size(); ++fi) {
      if (gone[gi].type == fresh[fi].type) {
        pairs.push_back({manhattan(gone[gi].anchor, fresh[fi].anchor), gone[gi].anchor,
                         fresh[fi].anchor, gi, fi});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.from, a.to) < std::tie(b.dist, b.from, b.to);
  });
  std::vector<char> gone_used(gone.size(), 0);
  std::vector<char> fresh_used(fresh.size(), 0);
  std::vector<BrickEvent> removed, moved, placed;
  for (const auto& pr : pairs) {
    if (gone_used[pr.gi] || fresh_used[pr.fi]) continue;
    gone_used[pr.gi] = fresh_used[pr.fi] = 1;
    moved.push_back({Action::Moved, gone[pr.gi].type, pr.to, pr.from, scan_seq});
  }
  for (std::size_t i = 0; i < gone.size(); ++i) {
    if (!gone_used[i]) removed.push_back({Action::Removed, gone[i].type, gone[i].anchor, {}, scan_seq});
  }
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (!fresh_used[i]) placed.push_back({Action::Placed, fresh[i].type, fresh[i].anchor, {}, scan_seq});
  }
  auto by_anchor = [](const BrickEvent& a, const BrickEvent& b) {
    return std::tie(a.at, a.from, a.brick) < std::tie(b.at, b.from, b.brick);
  };
  std::sort(removed.begin(), removed.end(), by_anchor);
  std::sort(moved.begin(), moved.end(), by_anchor);
  std::sort(placed.begin(), placed.end(), by_anchor);
  std::vector<BrickEvent> out = std::move(removed);
  out.insert(out.end(), moved.begin(), moved.end());
  out.insert(out.end(), placed.begin(), placed.end());
  return out;
}

std::vector<Detection> apply_events(std::vector<Detection> state,
                                    const std::vector<BrickEvent>& events,
                                    const LookupTable& table) {
  auto erase = [&](const BrickType& t, Cell at) {
    const auto it = std::find_if(state.begin(), state.end(), [&](const Detection& d) {
      return d.type == t && d.anchor == at;
    });
    if (it == state.end()) {
      throw std::invalid_argument("event refers to a brick that is not present");
    }
    state.erase(it);
  };
  auto k_of = [&](const BrickType& t) {
    const auto* code = table.find(t);
    return code ? code->k : 2;
  };
  for (const auto& e : events) {
    switch (e.action) {
      case Action::Removed: erase(e.brick, e.at); break;
      case Action::Moved:
        erase(e.brick, *e.from);
        state.push_back({e.brick, e.at, k_of(e.brick)});
        break;
      case Action::Placed: state.push_back({e.brick, e.at, k_of(e.brick)}); break;
    }
  }
  std::sort(state.begin(), state.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.anchor, a.type) < std::tie(b.anchor, b.type);
  });
  return state;
}

CellFrame compose_quadrants(const std::array<CellFrame, 4>& q, const GridSpec& spec) {
  spec.validate();
  const int qr = spec.quadrant_rows();
  const int qc = spec.quadrant_cols();
  for (std::size_t i = 0; i < 4; ++i) {
    if (q[i].rows != qr || q[i].cols != qc) {
      throw std::invalid_argument("quadrant " + std::to_string(i) + " is " +
                                  std::to_string(q[i].rows) + "x" + std::to_string(q[i].cols) +
                                  ", expected " + std::to_string(qr) + "x" + std::to_string(qc));
    }
    if (q[i].scan_seq != q[0].scan_seq) {
      throw TornScanError("torn scan: quadrant scan_seq " + std::to_string(q[0].scan_seq) +
                          " vs " + std::to_string(q[i].scan_seq));
    }
  }
  auto full = CellFrame::blank(spec.rows, spec.cols, q[0].scan_seq);
  for (int i = 0; i < 4; ++i) {
    const int r0 = (i / 2) * qr;
    const int c0 = (i % 2) * qc;
    for (int r = 0; r < qr; ++r) {
      for (int c = 0; c < qc; ++c) {
        full.at(r0 + r, c0 + c) = q[i].at(r, c);
      }
    }
  }
  return full;
}

std::array<CellFrame, 4> split_quadrants(const CellFrame& frame) {
  const int qr = frame.rows / 2;
  const int qc = frame.cols / 2;
  std::array<CellFrame, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = CellFrame::blank(qr, qc, frame.scan_seq);
    const int r0 = (i / 2) * qr;
    const int c0 = (i % 2) * qc;
    for (int r = 0; r < qr; ++r) {
      for (int c = 0; c < qc; ++c) {
        out[i].at(r, c) = frame.at(r0 + r, c0 + c);
      }
    }
  }
  return out;
}

CellFrame rotate_frame(const CellFrame& frame) {
  if (frame.rows != frame.cols) {
    throw std::invalid_argument("frame rotation needs a square grid");
  }
  auto out = CellFrame::blank(frame.rows, frame.cols, frame.scan_seq);
  for (int r = 0; r < frame.rows; ++r) {
    for (int c = 0; c < frame.cols; ++c) {
      out.at(c, frame.rows - 1 - r) = frame.at(r, c);
    }
  }
  return out;
}

Cell rotate_anchor(Cell a, int k, int rows) { return {a.col, rows - k - a.row}; }

void append_events(std::ostream& out, const std::vector<BrickEvent>& events) {
  for (const auto& e : events) {
    out << to_json(e).dump() << '\n';
  }
  out.flush();
}

std::vector<BrickEvent> read_events(std::istream& in) {
  std::vector<BrickEvent> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(brick_event_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace findingplaces::tangible
