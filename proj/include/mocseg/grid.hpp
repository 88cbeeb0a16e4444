#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace mocseg {

/// Integer raster position. Rows grow downwards, columns to the right.
struct Pixel {
  int row = 0;
  int col = 0;

  auto operator<=>(const Pixel&) const = default;
};

/// Real-valued planar point in image axes: x follows columns, y follows rows.
struct PointD {
  double x = 0.0;
  double y = 0.0;
};

inline PointD to_point(Pixel p) { return {static_cast<double>(p.col), static_cast<double>(p.row)}; }

/// Dense row-major matrix used for every per-pixel map in the library.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }

  T& operator()(int row, int col) { return values_[index(row, col)]; }
  const T& operator()(int row, int col) const { return values_[index(row, col)]; }
  T& operator[](Pixel p) { return values_[index(p.row, p.col)]; }
  const T& operator[](Pixel p) const { return values_[index(p.row, p.col)]; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

}  // namespace mocseg
