#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "mocseg/grid.hpp"

namespace mocseg {

enum class Polarity { dark_is_fg, light_is_fg };

/// Binarized page raster. A set pixel is ink (foreground).
class BinaryImage {
 public:
  BinaryImage() = default;
  /// Throws FormatError when either dimension is below 1.
  BinaryImage(int width, int height);

  int width() const { return bits_.width(); }
  int height() const { return bits_.height(); }
  bool contains(int row, int col) const { return bits_.contains(row, col); }

  bool at(int row, int col) const { return bits_(row, col) != 0; }
  bool at(Pixel p) const { return bits_[p] != 0; }
  void set(int row, int col, bool fg = true) { bits_(row, col) = fg ? 1 : 0; }
  void set(Pixel p, bool fg = true) { bits_[p] = fg ? 1 : 0; }

  std::size_t foreground_count() const;
  std::vector<Pixel> foreground_pixels() const;

  const Grid<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const BinaryImage&) const = default;

 private:
  Grid<std::uint8_t> bits_;
};

struct BoundingBox {
  int top = 0;
  int left = 0;
  int bottom = 0;  // inclusive
  int right = 0;   // inclusive

  int height() const { return bottom - top + 1; }
  int width() const { return right - left + 1; }
};

struct ConnectedComponent {
  int id = 0;
  std::vector<Pixel> pixels;
  BoundingBox bbox;
  int height = 0;
  PointD centroid;  // x = column, y = row
};

struct HeightStats {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Thresholds an 8-bit gray raster at mid-range (128).
BinaryImage binarize_gray(const Grid<std::uint8_t>& gray, Polarity polarity);

/// Decodes PNG/PGM (gray or RGB) and thresholds it. Throws IoError or FormatError.
BinaryImage load_binary_image(const std::filesystem::path& path,
                              Polarity polarity = Polarity::dark_is_fg);

/// Writes ink as black on white, 8-bit gray PNG.
void save_binary_image(const std::filesystem::path& path, const BinaryImage& img);

/// 8-connected labeling; 0 is background, components numbered 1..N in raster scan order.
Grid<int> label_components(const Grid<std::uint8_t>& bits, int* count = nullptr);

/// Components partition the foreground. Ids are 1..N in scan order of each
/// component's first pixel.
std::vector<ConnectedComponent> connected_components(const BinaryImage& img);

/// Population statistics of component bounding-box heights. Throws DomainError when empty.
HeightStats component_height_stats(std::span<const ConnectedComponent> components);

/// Filter scale interval [mu/2, (mu + sigma/2)/2].
std::pair<double, double> scale_range(const HeightStats& stats);

// Raster file helpers backed by the image codec library.
Grid<std::uint8_t> read_gray8(const std::filesystem::path& path);
Grid<std::uint16_t> read_gray16(const std::filesystem::path& path);
Grid<std::array<std::uint8_t, 3>> read_rgb(const std::filesystem::path& path);
void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& img);
void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& img);
void write_rgb(const std::filesystem::path& path, const Grid<std::array<std::uint8_t, 3>>& img);

}  // namespace mocseg
