#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "findingplaces/tangible/tangible.hpp"

namespace findingplaces::tangible {

/// 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  static Image filled(int width, int height, Rgb color);
  Rgb at(int x, int y) const {
    const auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  /// Sub-image copy.
  Image crop(int x0, int y0, int w, int h) const;
  friend bool operator==(const Image&, const Image&) = default;
};

/// Throws std::runtime_error on IO or decode failure.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct QuantizeOptions {
  /// Euclidean RGB distance to the nearest palette color.
  double tolerance = 60.0;
};

namespace serial {
CellFrame quantize(const Image& image, const GridSpec& spec, std::uint64_t scan_seq = 0,
                   const QuantizeOptions& opt = {});
}
namespace parallel {
CellFrame quantize(const Image& image, const GridSpec& spec, std::uint64_t scan_seq = 0,
                   const QuantizeOptions& opt = {});
}

/// Labels each cell by the mean of its central half. Throws DimensionError.
inline CellFrame quantize(const Image& image, const GridSpec& spec, std::uint64_t scan_seq = 0,
                          const QuantizeOptions& opt = {}) {
  return parallel::quantize(image, spec, scan_seq, opt);
}

struct Placement {
  BrickType type;
  Cell anchor;
  int rotation = 0;  // quarter turns clockwise
};

/// Paints placements as cells into a frame. Throws std::invalid_argument for
/// unknown types or footprints leaving the grid.
CellFrame paint(const std::vector<Placement>& placements, const LookupTable& table, int rows,
                int cols, std::uint64_t scan_seq = 0);

/// Pixel frame of a cell frame on a white canvas.
Image render(const CellFrame& frame, const GridSpec& spec);

/// Uniform per-channel noise of ±fraction·255, clamped.
void add_noise(Image& image, double fraction, std::mt19937_64& rng);

/// Cuts a whole-table image into the four camera views (TL, TR, BL, BR).
std::array<Image, 4> split_image(const Image& image, const GridSpec& spec);

/// Random placement set: in-grid footprints that neither overlap nor touch
/// edge to edge.
std::vector<Placement> random_placements(std::mt19937_64& rng, const LookupTable& table, int rows,
                                         int cols, int max_bricks);

}  // namespace findingplaces::tangible
