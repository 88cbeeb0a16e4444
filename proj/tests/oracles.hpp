// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the library code under test
// except plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "mocseg/energy.hpp"
#include "mocseg/ground_truth.hpp"
#include "mocseg/imaging.hpp"
#include "mocseg/merge.hpp"

namespace oracle {

// --- evaluation ---------------------------------------------------------------

struct EvalCounts {
  long tp = 0, fp = 0, fn = 0;
  long cl = 0, ml = 0, el = 0;
  double pixel_iu = 1.0;
  double line_iu = 1.0;
};

/// Per-pixel set arithmetic over two label rasters restricted to ink.
inline EvalCounts evaluate(const mocseg::Grid<int>& gt, int n_gt, const mocseg::Grid<int>& pred, int n_pred,
                           const mocseg::BinaryImage& ink) {
  auto in_gt = [&](int r, int c, int g) { return ink.at(r, c) && gt(r, c) == g; };
  auto in_pred = [&](int r, int c, int p) { return ink.at(r, c) && pred(r, c) == p; };
  auto count = [&](auto&& pred_fn) {
    long n = 0;
    for (int r = 0; r < ink.height(); ++r)
      for (int c = 0; c < ink.width(); ++c) n += pred_fn(r, c) ? 1 : 0;
    return n;
  };

  struct Pair {
    int g, p;
    long inter, uni;
  };
  std::vector<Pair> pairs;
  for (int g = 1; g <= n_gt; ++g)
    for (int p = 1; p <= n_pred; ++p) {
      const long inter = count([&](int r, int c) { return in_gt(r, c, g) && in_pred(r, c, p); });
      const long uni = count([&](int r, int c) { return in_gt(r, c, g) || in_pred(r, c, p); });
      if (inter > 0) pairs.push_back({g, p, inter, uni});
    }
  // Exact rational ordering: a.inter/a.uni > b.inter/b.uni.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    const long lhs = a.inter * b.uni, rhs = b.inter * a.uni;
    if (lhs != rhs) return lhs > rhs;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });
  std::vector<char> used_g(n_gt + 1, 0), used_p(n_pred + 1, 0);
  EvalCounts out;
  for (const auto& pr : pairs) {
    if (used_g[pr.g] || used_p[pr.p]) continue;
    used_g[pr.g] = used_p[pr.p] = 1;
    const long tp = pr.inter;
    const long fp = count([&](int r, int c) { return in_pred(r, c, pr.p) && !in_gt(r, c, pr.g); });
    const long fn = count([&](int r, int c) { return in_gt(r, c, pr.g) && !in_pred(r, c, pr.p); });
    out.tp += tp;
    out.fp += fp;
    out.fn += fn;
    // precision >= 3/4 and recall >= 3/4 in integers
    const bool prec_ok = 4 * tp >= 3 * (tp + fp);
    const bool rec_ok = 4 * tp >= 3 * (tp + fn);
    if (prec_ok && rec_ok) {
      ++out.cl;
    } else {
      if (!rec_ok) ++out.ml;
      if (!prec_ok) ++out.el;
    }
  }
  for (int g = 1; g <= n_gt; ++g)
    if (!used_g[g]) {
      out.fn += count([&](int r, int c) { return in_gt(r, c, g); });
      ++out.ml;
    }
  for (int p = 1; p <= n_pred; ++p)
    if (!used_p[p]) {
      out.fp += count([&](int r, int c) { return in_pred(r, c, p); });
      ++out.el;
    }
  const long px_den = out.tp + out.fp + out.fn;
  out.pixel_iu = px_den == 0 ? 1.0 : static_cast<double>(out.tp) / static_cast<double>(px_den);
  const long ln_den = out.cl + out.ml + out.el;
  out.line_iu = ln_den == 0 ? 1.0 : static_cast<double>(out.cl) / static_cast<double>(ln_den);
  return out;
}

/// Random label raster with up to max_lines lines drawn as overlapping rectangles.
inline mocseg::Grid<int> random_labels(std::mt19937_64& rng, int w, int h, int n_lines) {
  mocseg::Grid<int> g(w, h, 0);
  for (int l = 1; l <= n_lines; ++l) {
    const int rects = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < rects; ++k) {
      const int r0 = static_cast<int>(rng() % h), c0 = static_cast<int>(rng() % w);
      const int r1 = std::min(h - 1, r0 + static_cast<int>(rng() % (h / 2 + 1)));
      const int c1 = std::min(w - 1, c0 + static_cast<int>(rng() % (w / 2 + 1)));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) g(r, c) = l;
    }
  }
  return g;
}

/// A perturbed copy: random pixels relabeled and random rectangles reassigned.
inline mocseg::Grid<int> perturb_labels(std::mt19937_64& rng, const mocseg::Grid<int>& src, int n_lines) {
  mocseg::Grid<int> g = src;
  const int w = g.width(), h = g.height();
  const int blocks = static_cast<int>(rng() % 4);
  for (int k = 0; k < blocks; ++k) {
    const int r0 = static_cast<int>(rng() % h), c0 = static_cast<int>(rng() % w);
    const int r1 = std::min(h - 1, r0 + static_cast<int>(rng() % (h / 3 + 1)));
    const int c1 = std::min(w - 1, c0 + static_cast<int>(rng() % (w / 3 + 1)));
    const int l = static_cast<int>(rng() % static_cast<std::uint64_t>(n_lines + 1));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) g(r, c) = l;
  }
  const int noise = static_cast<int>(rng() % static_cast<std::uint64_t>(w * h / 8 + 1));
  for (int k = 0; k < noise; ++k)
    g(static_cast<int>(rng() % h), static_cast<int>(rng() % w)) =
        static_cast<int>(rng() % static_cast<std::uint64_t>(n_lines + 1));
  return g;
}

inline int max_label(const mocseg::Grid<int>& g) {
  int m = 0;
  for (int v : g.values()) m = std::max(m, v);
  return m;
}

// --- energy -------------------------------------------------------------------

inline double energy_of(const mocseg::EnergyProblem& p, const std::vector<int>& f) {
  double e = 0.0;
  for (int i = 0; i < p.n_elements; ++i) e += p.data_cost[static_cast<std::size_t>(i) * p.n_labels + f[i]];
  for (const auto& nb : p.neighbors)
    if (f[nb.a] != f[nb.b]) e += nb.weight;
  std::vector<char> used(p.n_labels, 0);
  for (int l : f) used[l] = 1;
  for (int l = 0; l < p.n_labels; ++l)
    if (used[l]) e += p.label_cost[l];
  return e;
}

/// Minimum over all m^n labelings.
inline double enumerate_min_energy(const mocseg::EnergyProblem& p) {
  std::vector<int> f(p.n_elements, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    best = std::min(best, energy_of(p, f));
    int i = 0;
    while (i < p.n_elements && ++f[i] == p.n_labels) f[i++] = 0;
    if (i == p.n_elements) break;
  }
  return best;
}

inline mocseg::EnergyProblem random_energy_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 8), m_dist(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = n_dist(rng), m = m_dist(rng);
  mocseg::EnergyProblem p(n, m);
  for (auto& d : p.data_cost) d = 10.0 * u(rng);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (u(rng) < 0.4) p.neighbors.push_back({a, b, 5.0 * u(rng)});
  for (auto& h : p.label_cost) h = u(rng) < 0.2 ? 0.0 : 8.0 * u(rng);
  return p;
}

// --- spanning trees -------------------------------------------------------------

/// Minimum spanning tree weight by enumerating every (V-1)-edge subset.
inline double enumerate_mst_weight(int vertex_count, const std::vector<mocseg::MergeEdge>& edges) {
  const int e = static_cast<int>(edges.size());
  const int need = vertex_count - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(need));
  std::iota(pick.begin(), pick.end(), 0);
  if (need > e) return best;
  while (true) {
    std::vector<int> parent(vertex_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    bool acyclic = true;
    double w = 0.0;
    for (int k : pick) {
      const int ra = find(edges[k].a), rb = find(edges[k].b);
      if (ra == rb) {
        acyclic = false;
        break;
      }
      parent[ra] = rb;
      w += edges[k].weight;
    }
    if (acyclic) best = std::min(best, w);
    int i = need - 1;
    while (i >= 0 && pick[i] == e - need + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// A merge graph over n <= 3 blobs with random root and cross weights.
inline mocseg::MergeGraph random_merge_graph(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % 3);
  mocseg::MergeGraph g;
  g.vertex_count = 2 * n + 1;
  for (int i = 0; i < n; ++i)
    g.edges.push_back({mocseg::MergeGraph::endpoint_vertex(i, 0), mocseg::MergeGraph::endpoint_vertex(i, 1),
                       mocseg::EdgeKind::intra, 0.0});
  // Quantized weights so that ties occur regularly.
  auto weight = [&] { return 1.0 + std::round(20.0 * u(rng)) / 4.0; };
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < 2; ++e)
      g.edges.push_back({0, mocseg::MergeGraph::endpoint_vertex(i, e), mocseg::EdgeKind::root, weight()});
  std::vector<char> taken(static_cast<std::size_t>(g.vertex_count), 0);
  for (int a = 1; a < g.vertex_count; ++a)
    for (int b = a + 1; b < g.vertex_count; ++b) {
      if (mocseg::MergeGraph::blob_of(a) == mocseg::MergeGraph::blob_of(b) || taken[a] || taken[b]) continue;
      if (u(rng) < 0.6) {
        taken[a] = taken[b] = 1;
        g.edges.push_back({a, b, mocseg::EdgeKind::cross, weight()});
      }
    }
  return g;
}

// --- geometry -------------------------------------------------------------------

/// Pixel center inside or on the polygon, by even-odd ray casting in doubled
/// integer coordinates (center of pixel (r, c) is (2c + 1, 2r + 1)).
inline bool covers(const mocseg::Polygon& poly, int row, int col) {
  const std::int64_t px = 2 * col + 1, py = 2 * row + 1;
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t ax = 2 * poly[i].x, ay = 2 * poly[i].y;
    const std::int64_t bx = 2 * poly[(i + 1) % n].x, by = 2 * poly[(i + 1) % n].y;
    const std::int64_t cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    if (cross == 0 && std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py &&
        py <= std::max(ay, by))
      return true;
    if ((ay > py) != (by > py)) {
      // x coordinate of the crossing compared without division
      const std::int64_t lhs = (px - ax) * (by - ay);
      const std::int64_t rhs = (bx - ax) * (py - ay);
      if ((by > ay) ? lhs < rhs : lhs > rhs) inside = !inside;
    }
  }
  return inside;
}

// --- raster helpers -------------------------------------------------------------

inline mocseg::BinaryImage fill_rect(mocseg::BinaryImage img, int top, int left, int bottom, int right) {
  for (int r = top; r <= bottom; ++r)
    for (int c = left; c <= right; ++c) img.set(r, c);
  return img;
}

inline std::vector<mocseg::Pixel> rect_pixels(int top, int left, int bottom, int right) {
  std::vector<mocseg::Pixel> px;
  for (int r = top; r <= bottom; ++r)
    for (int c = left; c <= right; ++c) px.push_back({r, c});
  return px;
}

}  // namespace oracle
