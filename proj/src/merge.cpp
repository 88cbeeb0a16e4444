#include "mocseg/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

double dist(PointD a, PointD b) { return std::hypot(a.x - b.x, a.y - b.y); }

// True when s, u, v, t lie on one line in that order. Exact for
// integer-valued coordinates, which is what anchors are.
bool ordered_collinear(PointD u, PointD v, PointD s, PointD t) {
  const double dx = t.x - s.x, dy = t.y - s.y;
  auto cross = [&](PointD p) { return (p.x - s.x) * dy - (p.y - s.y) * dx; };
  auto along = [&](PointD p) { return (p.x - s.x) * dx + (p.y - s.y) * dy; };
  if (cross(u) != 0.0 || cross(v) != 0.0) return false;
  const double pu = along(u), pv = along(v), len2 = dx * dx + dy * dy;
  return 0.0 <= pu && pu <= pv && pv <= len2;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

const char* kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::intra: return "E1";
    case EdgeKind::root: return "E2";
    case EdgeKind::cross: return "E3";
  }
  return "?";
}

}  // namespace

std::vector<EndpointAnchor> endpoint_anchors(const BlobLine& blob, int d) {
  const auto path = skeleton_diameter_path(blob.skeleton);
  if (path.empty()) return {};
  const int last = static_cast<int>(path.size()) - 1;
  const int step = std::clamp(d, 0, last);
  return {{path.front(), path[step]}, {path.back(), path[last - step]}};
}

double linearity_weight(PointD u, PointD v, PointD s, PointD t, double gamma_merge) {
  const double base = dist(s, t);
  if (base == 0.0) throw DomainError("linearity weight undefined for coincident anchors");
  if (ordered_collinear(u, v, s, t)) return 1.0;
  const double ratio = (dist(s, u) + dist(u, v) + dist(v, t)) / base;
  // The triangle inequality bounds the ratio below by 1; rounding must not undercut it.
  return std::exp(gamma_merge * (std::max(ratio, 1.0) - 1.0));
}

MergeGraph build_merge_graph(std::span<const BlobLine> blobs, const BinaryImage& img,
                             double max_scale, const MergeParams& params) {
  const auto support = blob_support(blobs, img);
  return build_merge_graph(blobs, support, max_scale, params);
}

MergeGraph build_merge_graph(std::span<const BlobLine> blobs, std::span<const double> support,
                             double max_scale, const MergeParams& params) {
  MergeGraph g;
  const int n = static_cast<int>(blobs.size());
  g.blobs.assign(blobs.begin(), blobs.end());
  g.vertex_count = 2 * n + 1;

  const int d = std::max(1, static_cast<int>(std::lround(params.anchor_factor * max_scale)));
  const double cap = params.cap_factor * max_scale;

  std::vector<EndpointAnchor> anchors(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    auto a = endpoint_anchors(blobs[i], d);
    if (a.size() != 2) throw DomainError("blob without skeleton cannot enter the merge graph");
    anchors[2 * i] = a[0];
    anchors[2 * i + 1] = a[1];
    g.edges.push_back({MergeGraph::endpoint_vertex(i, 0), MergeGraph::endpoint_vertex(i, 1),
                       EdgeKind::intra, 0.0});
  }
  for (int i = 0; i < n; ++i) {
    const double r = support[i];
    const double w = params.literal_e2 ? r : std::exp(params.gamma_merge * (1.0 - r));
    for (int e = 0; e < 2; ++e) g.edges.push_back({0, MergeGraph::endpoint_vertex(i, e), EdgeKind::root, w});
  }

  struct Candidate {
    double w;
    int a, b;
  };
  std::vector<Candidate> cand;
  for (int p = 0; p < 2 * n; ++p) {
    for (int q = p + 1; q < 2 * n; ++q) {
      if (p / 2 == q / 2) continue;
      const PointD u = to_point(anchors[p].endpoint), v = to_point(anchors[q].endpoint);
      if (dist(u, v) > cap) continue;
      const PointD s = to_point(anchors[p].nearby), t = to_point(anchors[q].nearby);
      if (s.x == t.x && s.y == t.y) continue;
      cand.push_back({linearity_weight(u, v, s, t, params.gamma_merge), p + 1, q + 1});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
  });
  std::vector<char> taken(static_cast<std::size_t>(g.vertex_count), 0);
  for (const auto& c : cand) {
    if (taken[c.a] || taken[c.b]) continue;
    taken[c.a] = taken[c.b] = 1;
    g.edges.push_back({c.a, c.b, EdgeKind::cross, c.w});
  }
  return g;
}

std::vector<int> minimum_spanning_tree(const MergeGraph& graph) {
  std::vector<int> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    const auto& e = graph.edges[i];
    return std::make_tuple(e.weight, std::min(e.a, e.b), std::max(e.a, e.b), i);
  };
  std::sort(order.begin(), order.end(), [&](int x, int y) { return key(x) < key(y); });
  DisjointSets sets(graph.vertex_count);
  std::vector<int> tree;
  for (int i : order)
    if (sets.unite(graph.edges[i].a, graph.edges[i].b)) tree.push_back(i);
  return tree;
}

std::vector<BlobLine> mst_merge(const MergeGraph& graph) {
  const auto tree = minimum_spanning_tree(graph);
  DisjointSets sets(graph.vertex_count);
  for (int i : tree) {
    const auto& e = graph.edges[i];
    if (e.a != 0 && e.b != 0) sets.unite(e.a, e.b);
  }

  const int n = static_cast<int>(graph.blobs.size());
  std::vector<int> group_of_root(static_cast<std::size_t>(graph.vertex_count), -1);
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    const int root = sets.find(MergeGraph::endpoint_vertex(i, 0));
    if (group_of_root[root] < 0) {
      group_of_root[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of_root[root]].push_back(i);
  }

  std::vector<BlobLine> out;
  out.reserve(groups.size());
  for (const auto& members : groups) {
    if (members.size() == 1) {
      out.push_back(graph.blobs[members.front()]);
      out.back().id = static_cast<int>(out.size());
      continue;
    }
    BlobLine merged;
    merged.id = static_cast<int>(out.size()) + 1;
    std::vector<Pixel> ends;
    for (int i : members) {
      const auto& b = graph.blobs[i];
      merged.pixels.insert(merged.pixels.end(), b.pixels.begin(), b.pixels.end());
      merged.skeleton.insert(merged.skeleton.end(), b.skeleton.begin(), b.skeleton.end());
      ends.insert(ends.end(), b.endpoints.begin(), b.endpoints.end());
    }
    std::sort(merged.pixels.begin(), merged.pixels.end());
    merged.pixels.erase(std::unique(merged.pixels.begin(), merged.pixels.end()), merged.pixels.end());
    std::sort(merged.skeleton.begin(), merged.skeleton.end());
    merged.skeleton.erase(std::unique(merged.skeleton.begin(), merged.skeleton.end()),
                          merged.skeleton.end());

    // The union is usually disconnected, so take the farthest pair of member endpoints.
    std::size_t bi = 0, bj = 0;
    long best = -1;
    for (std::size_t i = 0; i < ends.size(); ++i)
      for (std::size_t j = i + 1; j < ends.size(); ++j) {
        const long dr = ends[i].row - ends[j].row, dc = ends[i].col - ends[j].col;
        if (dr * dr + dc * dc > best) {
          best = dr * dr + dc * dc;
          bi = i;
          bj = j;
        }
      }
    merged.endpoints = {std::min(ends[bi], ends[bj]), std::max(ends[bi], ends[bj])};
    if (merged.pixels.size() >= 2) {
      try {
        merged.theta_pca = principal_orientation_and_align(merged.pixels).theta;
      } catch (const DomainError&) {
        merged.theta_pca = 0.0;
      }
    }
    out.push_back(std::move(merged));
  }
  return out;
}

void write_graph_csv(std::ostream& out, const MergeGraph& graph) {
  out << "src,dst,kind,weight\n";
  for (const auto& e : graph.edges) {
    out << e.a << ',' << e.b << ',' << kind_name(e.kind) << ',';
    out.precision(17);
    out << e.weight << '\n';
  }
}

}  // namespace mocseg
