#include "findingplaces/tangible/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace findingplaces::tangible {

Image Image::filled(int width, int height, Rgb color) {
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = color.r;
    img.rgb[i + 1] = color.g;
    img.rgb[i + 2] = color.b;
  }
  return img;
}

Image Image::crop(int x0, int y0, int w, int h) const {
  Image out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    std::memcpy(&out.rgb[static_cast<std::size_t>(y) * w * 3],
                &rgb[(static_cast<std::size_t>(y0 + y) * width + x0) * 3],
                static_cast<std::size_t>(w) * 3);
  }
  return out;
}

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw std::runtime_error("cannot read " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.rgb.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&png);
    throw std::runtime_error("cannot decode " + path.string() + ": " + png.message);
  }
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.rgb.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write " + path.string() + ": " + png.message);
  }
}

namespace {

void check_dimensions(const Image& image, const GridSpec& spec) {
  if (image.width != spec.width_px() || image.height != spec.height_px()) {
    throw DimensionError("frame is " + std::to_string(image.width) + "x" +
                         std::to_string(image.height) + " px, expected " +
                         std::to_string(spec.width_px()) + "x" + std::to_string(spec.height_px()));
  }
}

constexpr std::array<Color, 6> kCandidates{Color::Red,   Color::Green, Color::Blue,
                                           Color::Yellow, Color::Black, Color::White};

Color classify_cell(const Image& image, const GridSpec& spec, int r, int c, double tolerance) {
  // Central half of the cell, at least one pixel.
  const int margin = spec.cell_px / 4;
  const int span = std::max(1, spec.cell_px - 2 * margin);
  const int x0 = c * spec.cell_px + margin;
  const int y0 = r * spec.cell_px + margin;
  double sum[3] = {0, 0, 0};
  for (int y = y0; y < y0 + span; ++y) {
    for (int x = x0; x < x0 + span; ++x) {
      const Rgb p = image.at(x, y);
      sum[0] += p.r;
      sum[1] += p.g;
      sum[2] += p.b;
    }
  }
  const double n = static_cast<double>(span) * span;
  double best = tolerance * tolerance;
  Color label = Color::Neutral;
  for (Color cand : kCandidates) {
    const Rgb ref = palette_rgb(cand);
    const double dr = sum[0] / n - ref.r;
    const double dg = sum[1] / n - ref.g;
    const double db = sum[2] / n - ref.b;
    const double d2 = dr * dr + dg * dg + db * db;
    if (d2 <= best) {
      best = d2;
      label = cand;
    }
  }
  return label == Color::White ? Color::Neutral : label;
}

}  // namespace

namespace serial {
CellFrame quantize(const Image& image, const GridSpec& spec, std::uint64_t scan_seq,
                   const QuantizeOptions& opt) {
  check_dimensions(image, spec);
  auto frame = CellFrame::blank(spec.rows, spec.cols, scan_seq);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      frame.at(r, c) = classify_cell(image, spec, r, c, opt.tolerance);
    }
  }
  return frame;
}
}  // namespace serial

namespace parallel {
CellFrame quantize(const Image& image, const GridSpec& spec, std::uint64_t scan_seq,
                   const QuantizeOptions& opt) {
  check_dimensions(image, spec);
  auto frame = CellFrame::blank(spec.rows, spec.cols, scan_seq);
  const int n = spec.rows * spec.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    frame.cells[i] = classify_cell(image, spec, i / spec.cols, i % spec.cols, opt.tolerance);
  }
  return frame;
}
}  // namespace parallel

CellFrame paint(const std::vector<Placement>& placements, const LookupTable& table, int rows,
                int cols, std::uint64_t scan_seq) {
  auto frame = CellFrame::blank(rows, cols, scan_seq);
  for (const auto& p : placements) {
    const BrickCode* code = table.find(p.type);
    if (!code) {
      throw std::invalid_argument("no code for " + to_string(p.type));
    }
    const int k = code->k;
    if (p.anchor.row < 0 || p.anchor.col < 0 || p.anchor.row + k > rows ||
        p.anchor.col + k > cols) {
      throw std::invalid_argument(to_string(p.type) + " footprint leaves the grid");
    }
    auto pattern = code->pattern;
    for (int t = 0; t < ((p.rotation % 4) + 4) % 4; ++t) {
      pattern = rotate_pattern(pattern, k);
    }
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        frame.at(p.anchor.row + r, p.anchor.col + c) = pattern[static_cast<std::size_t>(r) * k + c];
      }
    }
  }
  return frame;
}

Image render(const CellFrame& frame, const GridSpec& spec) {
  Image img = Image::filled(frame.cols * spec.cell_px, frame.rows * spec.cell_px,
                            palette_rgb(Color::White));
  for (int r = 0; r < frame.rows; ++r) {
    for (int c = 0; c < frame.cols; ++c) {
      const Color color = frame.at(r, c);
      if (color == Color::Neutral) continue;
      const Rgb rgb = palette_rgb(color);
      for (int y = r * spec.cell_px; y < (r + 1) * spec.cell_px; ++y) {
        for (int x = c * spec.cell_px; x < (c + 1) * spec.cell_px; ++x) {
          img.set(x, y, rgb);
        }
      }
    }
  }
  return img;
}

void add_noise(Image& image, double fraction, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-fraction * 255.0, fraction * 255.0);
  for (auto& v : image.rgb) {
    v = static_cast<std::uint8_t>(std::clamp(std::lround(v + noise(rng)), 0L, 255L));
  }
}

std::array<Image, 4> split_image(const Image& image, const GridSpec& spec) {
  const int w = spec.quadrant_cols() * spec.cell_px;
  const int h = spec.quadrant_rows() * spec.cell_px;
  return {image.crop(0, 0, w, h), image.crop(w, 0, w, h), image.crop(0, h, w, h),
          image.crop(w, h, w, h)};
}

std::vector<Placement> random_placements(std::mt19937_64& rng, const LookupTable& table, int rows,
                                         int cols, int max_bricks) {
  std::vector<char> occupied(static_cast<std::size_t>(rows) * cols, 0);
  std::vector<Placement> out;
  std::uniform_int_distribution<int> count(1, std::max(1, max_bricks));
  std::uniform_int_distribution<std::size_t> pick(0, table.codes().size() - 1);
  std::uniform_int_distribution<int> turn(0, 3);
  const int want = count(rng);
  for (int attempt = 0; attempt < want * 20 && static_cast<int>(out.size()) < want; ++attempt) {
    const BrickCode& code = table.codes()[pick(rng)];
    const int k = code.k;
    const int r0 = std::uniform_int_distribution<int>(0, rows - k)(rng);
    const int c0 = std::uniform_int_distribution<int>(0, cols - k)(rng);
    const int rot = turn(rng);
    bool free = true;
    // Footprint plus its edge neighbours must be empty.
    for (int r = r0 - 1; r <= r0 + k && free; ++r) {
      for (int c = c0 - 1; c <= c0 + k && free; ++c) {
        const bool corner = (r == r0 - 1 || r == r0 + k) && (c == c0 - 1 || c == c0 + k);
        if (corner || r < 0 || c < 0 || r >= rows || c >= cols) continue;
        free = !occupied[static_cast<std::size_t>(r) * cols + c];
      }
    }
    if (!free) continue;
    for (int r = r0; r < r0 + k; ++r) {
      for (int c = c0; c < c0 + k; ++c) {
        occupied[static_cast<std::size_t>(r) * cols + c] = 1;
      }
    }
    out.push_back({code.type, {r0, c0}, rot});
  }
  return out;
}

}  // namespace findingplaces::tangible
