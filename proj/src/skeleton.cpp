#include <algorithm>
#include <array>
#include <deque>
#include <limits>

#include "mocseg/blob_lines.hpp"

namespace mocseg {

namespace {

// Clockwise from north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDr = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDc = {0, 1, 1, 1, 0, -1, -1, -1};

// Local raster over the bounding box of a pixel set with a one pixel margin.
struct LocalMask {
  int top = 0;
  int left = 0;
  Grid<std::uint8_t> bits;

  explicit LocalMask(std::span<const Pixel> pixels) {
    int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
    for (const auto& p : pixels) {
      r0 = std::min(r0, p.row);
      r1 = std::max(r1, p.row);
      c0 = std::min(c0, p.col);
      c1 = std::max(c1, p.col);
    }
    if (pixels.empty()) r0 = c0 = r1 = c1 = 0;
    top = r0 - 1;
    left = c0 - 1;
    bits = Grid<std::uint8_t>(c1 - c0 + 3, r1 - r0 + 3, 0);
    for (const auto& p : pixels) bits(p.row - top, p.col - left) = 1;
  }

  bool get(int row, int col) const {
    const int r = row - top, c = col - left;
    return bits.contains(r, c) && bits(r, c);
  }

  std::vector<Pixel> pixels() const {
    std::vector<Pixel> out;
    for (int r = 0; r < bits.height(); ++r)
      for (int c = 0; c < bits.width(); ++c)
        if (bits(r, c)) out.push_back({r + top, c + left});
    return out;
  }
};

std::array<bool, 8> ring(const Grid<std::uint8_t>& g, int r, int c) {
  std::array<bool, 8> n{};
  for (int i = 0; i < 8; ++i) {
    const int rr = r + kDr[i], cc = c + kDc[i];
    n[i] = g.contains(rr, cc) && g(rr, cc);
  }
  return n;
}

int transitions(const std::array<bool, 8>& n) {
  int a = 0;
  for (int i = 0; i < 8; ++i) a += !n[i] && n[(i + 1) % 8];
  return a;
}

int branches_local(const Grid<std::uint8_t>& g, int r, int c) {
  const auto n = ring(g, r, c);
  const int count = static_cast<int>(std::count(n.begin(), n.end(), true));
  if (count == 8) return 0;
  return transitions(n);
}

}  // namespace

std::vector<Pixel> thin(std::span<const Pixel> pixels) {
  if (pixels.empty()) return {};
  LocalMask m(pixels);
  Grid<std::uint8_t>& g = m.bits;
  std::vector<std::pair<int, int>> del;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      del.clear();
      for (int r = 1; r + 1 < g.height(); ++r) {
        for (int c = 1; c + 1 < g.width(); ++c) {
          if (!g(r, c)) continue;
          const auto n = ring(g, r, c);
          const int b = static_cast<int>(std::count(n.begin(), n.end(), true));
          if (b < 2 || b > 6) continue;
          if (transitions(n) != 1) continue;
          const bool north = n[0], east = n[2], south = n[4], west = n[6];
          if (pass == 0) {
            if (north && east && south) continue;
            if (east && south && west) continue;
          } else {
            if (north && east && west) continue;
            if (north && south && west) continue;
          }
          del.emplace_back(r, c);
        }
      }
      for (auto [r, c] : del) g(r, c) = 0;
      changed = changed || !del.empty();
    }
  }
  auto out = m.pixels();
  if (out.empty()) {
    // A 2x2 block thins to nothing; keep the pixel nearest the centroid.
    double sr = 0, sc = 0;
    for (const auto& p : pixels) {
      sr += p.row;
      sc += p.col;
    }
    sr /= static_cast<double>(pixels.size());
    sc /= static_cast<double>(pixels.size());
    Pixel best = pixels.front();
    double bd = std::numeric_limits<double>::max();
    for (const auto& p : pixels) {
      const double d = (p.row - sr) * (p.row - sr) + (p.col - sc) * (p.col - sc);
      if (d < bd || (d == bd && p < best)) {
        bd = d;
        best = p;
      }
    }
    out.push_back(best);
  }
  return out;
}

int skeleton_branches(const std::vector<Pixel>& skeleton_sorted, Pixel p) {
  int count = 0;
  std::array<bool, 8> n{};
  for (int i = 0; i < 8; ++i) {
    n[i] = std::binary_search(skeleton_sorted.begin(), skeleton_sorted.end(),
                              Pixel{p.row + kDr[i], p.col + kDc[i]});
    count += n[i];
  }
  if (count == 8) return 0;
  return transitions(n);
}

std::vector<Pixel> bifurcation_points(std::span<const Pixel> skeleton) {
  if (skeleton.empty()) return {};
  LocalMask m(skeleton);
  std::vector<Pixel> out;
  for (const auto& p : skeleton)
    if (branches_local(m.bits, p.row - m.top, p.col - m.left) >= 3) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Pixel> prune_spurs(std::span<const Pixel> skeleton, int min_length) {
  if (skeleton.size() < 3 || min_length <= 1) {
    std::vector<Pixel> out(skeleton.begin(), skeleton.end());
    std::sort(out.begin(), out.end());
    return out;
  }
  LocalMask m(skeleton);
  Grid<std::uint8_t>& g = m.bits;

  for (int round = 0; round < 2; ++round) {
    bool removed_any = false;
    std::vector<std::pair<int, int>> ends;
    for (int r = 0; r < g.height(); ++r)
      for (int c = 0; c < g.width(); ++c)
        if (g(r, c)) {
          const auto n = ring(g, r, c);
          if (transitions(n) == 1 && std::count(n.begin(), n.end(), true) <= 2)
            ends.emplace_back(r, c);
        }

    for (auto [er, ec] : ends) {
      if (!g(er, ec)) continue;
      std::vector<std::pair<int, int>> path{{er, ec}};
      Grid<std::uint8_t> seen(g.width(), g.height(), 0);
      seen(er, ec) = 1;
      int r = er, c = ec;
      bool hit_junction = false;
      while (static_cast<int>(path.size()) <= min_length) {
        int nr = -1, nc = -1;
        // Prefer 4-neighbours so staircases are walked pixel by pixel.
        for (int pref = 0; pref < 2 && nr < 0; ++pref) {
          for (int i = pref; i < 8; i += 2) {
            const int rr = r + kDr[i], cc = c + kDc[i];
            if (g.contains(rr, cc) && g(rr, cc) && !seen(rr, cc)) {
              nr = rr;
              nc = cc;
              break;
            }
          }
        }
        if (nr < 0) break;  // isolated arc, not a spur
        if (branches_local(g, nr, nc) >= 3) {
          hit_junction = true;
          break;
        }
        seen(nr, nc) = 1;
        path.emplace_back(nr, nc);
        r = nr;
        c = nc;
      }
      if (hit_junction && static_cast<int>(path.size()) < min_length) {
        for (auto [pr, pc] : path) g(pr, pc) = 0;
        removed_any = true;
      }
    }
    if (!removed_any) break;
  }
  return m.pixels();
}

std::vector<Pixel> skeleton_diameter_path(std::span<const Pixel> skeleton) {
  if (skeleton.empty()) return {};
  LocalMask m(skeleton);
  const Grid<std::uint8_t>& g = m.bits;

  auto bfs = [&](int sr, int sc, Grid<int>& parent) {
    Grid<int> dist(g.width(), g.height(), -1);
    std::deque<std::pair<int, int>> q{{sr, sc}};
    dist(sr, sc) = 0;
    parent(sr, sc) = -1;
    std::pair<int, int> far{sr, sc};
    while (!q.empty()) {
      auto [r, c] = q.front();
      q.pop_front();
      if (dist(r, c) > dist(far.first, far.second) ||
          (dist(r, c) == dist(far.first, far.second) && std::make_pair(r, c) < far))
        far = {r, c};
      for (int i = 0; i < 8; ++i) {
        const int rr = r + kDr[i], cc = c + kDc[i];
        if (!g.contains(rr, cc) || !g(rr, cc) || dist(rr, cc) >= 0) continue;
        dist(rr, cc) = dist(r, c) + 1;
        parent(rr, cc) = static_cast<int>(g.index(r, c));
        q.emplace_back(rr, cc);
      }
    }
    return far;
  };

  Grid<int> parent(g.width(), g.height(), -1);
  const Pixel start = *std::min_element(skeleton.begin(), skeleton.end());
  const auto a = bfs(start.row - m.top, start.col - m.left, parent);
  const auto b = bfs(a.first, a.second, parent);

  std::vector<Pixel> path;
  int idx = static_cast<int>(g.index(b.first, b.second));
  while (idx >= 0) {
    const int r = idx / g.width(), c = idx % g.width();
    path.push_back({r + m.top, c + m.left});
    idx = parent(r, c);
  }
  // path runs b -> a; orient it so the raster-earlier end comes first.
  if (path.back() < path.front()) std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace mocseg
