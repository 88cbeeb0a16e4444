#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mocseg/grid.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

/// Per-pixel line ids: 0 is background, k the k-th text line.
struct LineLabeling {
  Grid<int> labels;
  int n_lines = 0;

  LineLabeling() = default;
  LineLabeling(int width, int height) : labels(width, height, 0) {}

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }

  /// Throws DomainError unless every value is in [0, n_lines] and every line id occurs.
  void validate() const;

  bool operator==(const LineLabeling&) const = default;
};

/// Vertex on the pixel-corner lattice: x is a column boundary, y a row boundary.
struct Vertex {
  std::int64_t x = 0;
  std::int64_t y = 0;

  auto operator<=>(const Vertex&) const = default;
};

using Polygon = std::vector<Vertex>;

/// polygons[k - 1] bounds text line k.
struct PolygonSet {
  std::vector<Polygon> polygons;

  bool operator==(const PolygonSet&) const = default;
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kDivaOutside{0, 0, 0};
inline constexpr Rgb kDivaText{0, 0, 1};
inline constexpr Rgb kDivaBoundary{128, 0, 0};

struct DivaLabeling {
  Grid<Rgb> rgb;
};

/// Masks recovered from a DIVA raster.
struct DivaMasks {
  BinaryImage inside;  // pixel lies in some polygon
  BinaryImage text;    // pixel is text-line foreground
};

// --- raw labeling -------------------------------------------------------------

/// 16-bit gray PNG whose sample is the line id. Throws CapacityError above 65535 lines.
void write_raw_labels(const std::filesystem::path& path, const LineLabeling& labeling);
LineLabeling read_raw_labels(const std::filesystem::path& path);

/// Renumbers the distinct non-zero ids of a raster to 1..K in increasing order.
LineLabeling compact_labels(const Grid<int>& labels);

// --- polygons -----------------------------------------------------------------

/// Pixels whose centers lie inside or on the polygon, as a row-major mask.
Grid<std::uint8_t> rasterize_polygon(const Polygon& poly, int width, int height);

/// True when the pixel center lies inside or on the polygon boundary.
bool polygon_covers_pixel(const Polygon& poly, Pixel p);

/// Twice the signed area (shoelace).
std::int64_t doubled_area(const Polygon& poly);

bool is_simple_polygon(const Polygon& poly);

Polygon convex_hull(std::vector<Vertex> points);

/// k-nearest-neighbour concave hull starting at k (raised to at least 3).
/// Returns an empty polygon when no simple hull exists for this k.
Polygon concave_hull_k(const std::vector<Vertex>& points, int k);

/// Tight simple polygon around a pixel set: concave hull of the boundary
/// pixel corners with growing k, falling back to the convex hull. Every
/// pixel center is covered. Sets with fewer than 3 pixels get their bbox.
Polygon pixel_set_polygon(const std::vector<Pixel>& pixels);

PolygonSet polygons_from_labels(const LineLabeling& labeling);

// --- DIVA ---------------------------------------------------------------------

/// Outside every polygon: (0,0,0). Inside, foreground: (0,0,1). Inside, background: (128,0,0).
DivaLabeling diva_encode(const BinaryImage& img, const PolygonSet& polys);
/// Throws FormatError on any color outside the three codes.
DivaMasks diva_decode(const DivaLabeling& diva);
void write_diva(const std::filesystem::path& path, const DivaLabeling& diva);
DivaLabeling read_diva(const std::filesystem::path& path);

// --- PAGE XML -----------------------------------------------------------------

struct PageInfo {
  std::string image_filename;
  int width = 0;
  int height = 0;
};

void write_page_xml(std::ostream& out, const PolygonSet& polys, const PageInfo& info);
void write_page_xml(const std::filesystem::path& path, const PolygonSet& polys, const PageInfo& info);

/// Accepts Coords@points strings and Coords/Point@x,y children. TextLines are
/// numbered in document order. Throws ParseError with position on malformed XML.
PolygonSet read_page_xml_string(const std::string& text, PageInfo* info = nullptr);
PolygonSet read_page_xml(const std::filesystem::path& path, PageInfo* info = nullptr);

/// Formats "x,y x,y ..." as stored in Coords@points.
std::string format_points(const Polygon& poly);

// --- visualization ------------------------------------------------------------

/// Fixed 12-color cycle by id; id 0 is white.
Rgb palette_color(int id);
Grid<Rgb> render_labels(const Grid<int>& labels);
/// Ink colored by the covering polygon (lowest id), polygon outlines drawn on top.
Grid<Rgb> render_overlay(const BinaryImage& img, const Grid<int>& labels, const PolygonSet* polys);

}  // namespace mocseg
