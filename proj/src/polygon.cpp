#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <tuple>

#include "mocseg/errors.hpp"
#include "mocseg/ground_truth.hpp"

namespace mocseg {

namespace {

using i64 = std::int64_t;

i64 cross(Vertex o, Vertex a, Vertex b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int sign(i64 v) { return (v > 0) - (v < 0); }

bool on_segment(Vertex a, Vertex b, Vertex p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Closed segments share at least one point.
bool segments_touch(Vertex a, Vertex b, Vertex c, Vertex d) {
  const int d1 = sign(cross(c, d, a)), d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c)), d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

i64 floor_div(i64 a, i64 b) {
  i64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i64 ceil_div(i64 a, i64 b) { return -floor_div(-a, b); }

struct Fraction {
  i64 num;
  i64 den;  // > 0
};

bool less(const Fraction& a, const Fraction& b) { return a.num * b.den < b.num * a.den; }

// Crossings of the polygon boundary with the horizontal line through pixel
// centers of row r, in doubled coordinates. Vertices sit on even doubled
// ordinates and centers on odd ones, so no vertex ever lies on the line.
void row_crossings(const Polygon& poly, int row, std::vector<Fraction>& out) {
  out.clear();
  const i64 y = 2 * static_cast<i64>(row) + 1;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex a = poly[i], b = poly[(i + 1) % n];
    const i64 y0 = 2 * a.y, y1 = 2 * b.y;
    if ((y0 < y) == (y1 < y)) continue;
    const i64 x0 = 2 * a.x, x1 = 2 * b.x;
    Fraction f{x0 * (y1 - y0) + (y - y0) * (x1 - x0), y1 - y0};
    if (f.den < 0) {
      f.num = -f.num;
      f.den = -f.den;
    }
    out.push_back(f);
  }
  std::sort(out.begin(), out.end(), less);
}

// Marks covered pixels of rows [row0, row0 + h) and columns [col0, col0 + w).
Grid<std::uint8_t> rasterize_window(const Polygon& poly, int row0, int col0, int w, int h) {
  Grid<std::uint8_t> mask(w, h, 0);
  if (poly.size() < 3) return mask;
  std::vector<Fraction> xs;
  for (int r = 0; r < h; ++r) {
    row_crossings(poly, row0 + r, xs);
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Doubled center of column c is 2c + 1; keep a <= 2c + 1 <= b.
      const i64 lo = ceil_div(xs[i].num - xs[i].den, 2 * xs[i].den);
      const i64 hi = floor_div(xs[i + 1].num - xs[i + 1].den, 2 * xs[i + 1].den);
      const i64 c0 = std::max<i64>(lo, col0), c1 = std::min<i64>(hi, col0 + w - 1);
      for (i64 c = c0; c <= c1; ++c) mask(r, static_cast<int>(c - col0)) = 1;
    }
  }
  return mask;
}

// Lattice point inside or on the polygon.
bool covers_vertex(const Polygon& poly, Vertex p) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex a = poly[i], b = poly[(i + 1) % n];
    if (cross(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      // x of the crossing compared with p.x without division.
      const i64 lhs = (p.x - a.x) * (b.y - a.y);
      const i64 rhs = (p.y - a.y) * (b.x - a.x);
      if ((b.y > a.y) ? lhs < rhs : lhs > rhs) inside = !inside;
    }
  }
  return inside;
}

// Counter-clockwise angle class of v relative to reference r, in (0, 360].
int angle_class(Vertex r, Vertex v) {
  const i64 c = r.x * v.y - r.y * v.x;
  const i64 d = r.x * v.x + r.y * v.y;
  if (c > 0) return 0;
  if (c == 0 && d < 0) return 1;
  if (c < 0) return 2;
  return 3;
}

}  // namespace

Grid<std::uint8_t> rasterize_polygon(const Polygon& poly, int width, int height) {
  return rasterize_window(poly, 0, 0, width, height);
}

bool polygon_covers_pixel(const Polygon& poly, Pixel p) {
  if (poly.size() < 3) return false;
  std::vector<Fraction> xs;
  row_crossings(poly, p.row, xs);
  const Fraction x{2 * static_cast<i64>(p.col) + 1, 1};
  std::size_t left = 0;
  for (const auto& f : xs) {
    if (!less(f, x) && !less(x, f)) return true;
    if (less(f, x)) ++left;
  }
  return left % 2 == 1;
}

std::int64_t doubled_area(const Polygon& poly) {
  i64 s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vertex a = poly[i], b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return s;
}

bool is_simple_polygon(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex a = poly[i], b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vertex c = poly[j], d = poly[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they must not fold back onto each other.
        const Vertex shared = (j == i + 1) ? b : a;
        const Vertex p = (j == i + 1) ? a : b;
        const Vertex q = (j == i + 1) ? d : c;
        if (cross(shared, p, q) == 0 &&
            (p.x - shared.x) * (q.x - shared.x) + (p.y - shared.y) * (q.y - shared.y) > 0)
          return false;
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

Polygon convex_hull(std::vector<Vertex> pts) {
  std::sort(pts.begin(), pts.end(), [](Vertex a, Vertex b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon concave_hull_k(const std::vector<Vertex>& input, int k) {
  std::vector<Vertex> pts = input;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return {};
  if (n == 3) return cross(pts[0], pts[1], pts[2]) != 0 ? pts : Polygon{};
  k = std::clamp(k, 3, n - 1);

  int first = 0;
  for (int i = 1; i < n; ++i)
    if (std::tie(pts[i].y, pts[i].x) < std::tie(pts[first].y, pts[first].x)) first = i;

  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<int> hull{first};
  used[first] = 1;
  int current = first;
  Vertex back{-1, 0};

  std::vector<std::pair<i64, int>> pool;
  std::vector<int> cand;
  while (true) {
    const Vertex cur = pts[current];
    pool.clear();
    for (int i = 0; i < n; ++i) {
      const bool allowed = !used[i] || (i == first && hull.size() >= 3);
      if (!allowed) continue;
      const i64 dx = pts[i].x - cur.x, dy = pts[i].y - cur.y;
      pool.emplace_back(dx * dx + dy * dy, i);
    }
    if (pool.empty()) return {};
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end());
    cand.clear();
    for (std::size_t i = 0; i < take; ++i) cand.push_back(pool[i].second);
    // The closing vertex must stay reachable even when it is not among the k nearest.
    if (hull.size() >= 3 && std::find(cand.begin(), cand.end(), first) == cand.end() && take == pool.size())
      cand.push_back(first);

    auto dir = [&](int i) { return Vertex{pts[i].x - cur.x, pts[i].y - cur.y}; };
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      const Vertex va = dir(a), vb = dir(b);
      const int ca = angle_class(back, va), cb = angle_class(back, vb);
      if (ca != cb) return ca < cb;
      const i64 c = va.x * vb.y - va.y * vb.x;
      if (c != 0) return c > 0;
      const i64 la = va.x * va.x + va.y * va.y, lb = vb.x * vb.x + vb.y * vb.y;
      if (la != lb) return la < lb;
      return a < b;
    });

    int chosen = -1;
    for (int c : cand) {
      if (angle_class(back, dir(c)) == 3) continue;  // would retrace the last edge
      const bool closing = c == first;
      if (closing) {
        // The closing edge must not run along the first edge.
        const Vertex e0{pts[hull[1]].x - pts[first].x, pts[hull[1]].y - pts[first].y};
        const Vertex e1{cur.x - pts[first].x, cur.y - pts[first].y};
        if (e0.x * e1.y - e0.y * e1.x == 0 && e0.x * e1.x + e0.y * e1.y > 0) continue;
      }
      bool crosses = false;
      const std::size_t h = hull.size();
      for (std::size_t i = 0; i + 1 < h && !crosses; ++i) {
        if (i + 2 == h) continue;          // last edge ends at the current vertex
        if (closing && i == 0) continue;   // first edge starts at the closing vertex
        crosses = segments_touch(cur, pts[c], pts[hull[i]], pts[hull[i + 1]]);
      }
      if (!crosses) {
        chosen = c;
        break;
      }
    }
    if (chosen < 0) return {};
    if (chosen == first) break;
    hull.push_back(chosen);
    used[chosen] = 1;
    back = Vertex{cur.x - pts[chosen].x, cur.y - pts[chosen].y};
    current = chosen;
  }
  if (hull.size() < 3) return {};

  Polygon poly;
  poly.reserve(hull.size());
  for (int i : hull) poly.push_back(pts[i]);
  if (doubled_area(poly) == 0) return {};
  for (const auto& p : pts)
    if (!covers_vertex(poly, p)) return {};
  return poly;
}

Polygon pixel_set_polygon(const std::vector<Pixel>& input) {
  std::vector<Pixel> pixels = input;
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  if (pixels.empty()) return {};

  int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
  for (const auto& p : pixels) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col);
  }
  const Polygon box{{c0, r0}, {c1 + 1, r0}, {c1 + 1, r1 + 1}, {c0, r1 + 1}};
  if (pixels.size() < 3) return box;

  const int w = c1 - c0 + 1, h = r1 - r0 + 1;
  Grid<std::uint8_t> in(w + 2, h + 2, 0);
  for (const auto& p : pixels) in(p.row - r0 + 1, p.col - c0 + 1) = 1;

  // Corner (x, y) touches pixels (y-1, x-1), (y-1, x), (y, x-1), (y, x).
  std::vector<Vertex> corners;
  for (int y = r0; y <= r1 + 1; ++y) {
    for (int x = c0; x <= c1 + 1; ++x) {
      const int lr = y - r0 + 1, lc = x - c0 + 1;
      const int count = in(lr - 1, lc - 1) + in(lr - 1, lc) + in(lr, lc - 1) + in(lr, lc);
      if (count > 0 && count < 4) corners.push_back({x, y});
    }
  }

  auto covers_all = [&](const Polygon& poly) {
    const Grid<std::uint8_t> mask = rasterize_window(poly, r0, c0, w, h);
    for (const auto& p : pixels)
      if (!mask(p.row - r0, p.col - c0)) return false;
    return true;
  };

  const int n = static_cast<int>(corners.size());
  int k = 3;
  while (k < n) {
    Polygon poly = concave_hull_k(corners, k);
    if (!poly.empty() && covers_all(poly)) return poly;
    k = k < 8 ? k + 1 : static_cast<int>(std::ceil(k * 1.5));
  }
  Polygon hull = convex_hull(corners);
  if (hull.size() < 3) return box;
  return hull;
}

PolygonSet polygons_from_labels(const LineLabeling& labeling) {
  std::vector<std::vector<Pixel>> groups(static_cast<std::size_t>(labeling.n_lines));
  for (int r = 0; r < labeling.height(); ++r)
    for (int c = 0; c < labeling.width(); ++c) {
      const int l = labeling.labels(r, c);
      if (l > 0 && l <= labeling.n_lines) groups[l - 1].push_back({r, c});
    }
  PolygonSet set;
  set.polygons.reserve(groups.size());
  for (const auto& g : groups) set.polygons.push_back(pixel_set_polygon(g));
  return set;
}

}  // namespace mocseg
