#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "mocseg/errors.hpp"
#include "mocseg/merge.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace mocseg;

namespace {

double tree_weight(const MergeGraph& g, const std::vector<int>& tree) {
  double w = 0.0;
  for (int e : tree) w += g.edges[e].weight;
  return w;
}

int count_kind(const MergeGraph& g, EdgeKind k) {
  return static_cast<int>(std::count_if(g.edges.begin(), g.edges.end(), [&](const MergeEdge& e) { return e.kind == k; }));
}

double dist(Pixel a, Pixel b) { return std::hypot(a.row - b.row, a.col - b.col); }

}  // namespace

TEST_CASE("anchors sit d steps inside each end") {
  std::vector<Pixel> row;
  for (int c = 0; c < 100; ++c) row.push_back({5, c});
  BlobLine b;
  b.pixels = row;
  b.skeleton = row;
  const auto anchors = endpoint_anchors(b, 20);
  REQUIRE(anchors.size() == 2);
  const std::set<Pixel> ends{anchors[0].endpoint, anchors[1].endpoint};
  CHECK(ends == std::set<Pixel>{{5, 0}, {5, 99}});
  for (const auto& a : anchors) CHECK(dist(a.endpoint, a.nearby) == 20.0);
}

TEST_CASE("short skeletons anchor on the opposite end") {
  std::vector<Pixel> row;
  for (int c = 0; c < 10; ++c) row.push_back({0, c});
  BlobLine b;
  b.skeleton = row;
  const auto anchors = endpoint_anchors(b, 20);
  REQUIRE(anchors.size() == 2);
  CHECK(anchors[0].nearby == anchors[1].endpoint);
  CHECK(anchors[1].nearby == anchors[0].endpoint);
}

TEST_CASE("linearity weight of collinear ordered anchors is exactly one") {
  CHECK(linearity_weight({1, 0}, {2, 0}, {0, 0}, {3, 0}, 5.0) == 1.0);
  CHECK(linearity_weight({3, 3}, {5, 5}, {1, 1}, {9, 9}, 5.0) == 1.0);
  // Touching endpoints also count as ordered.
  CHECK(linearity_weight({4, 2}, {4, 2}, {0, 0}, {8, 4}, 5.0) == 1.0);
}

TEST_CASE("right-angle example") {
  const double w = linearity_weight({0, 0}, {1, 0}, {0, 1}, {2, 0}, 5.0);
  CHECK(w == doctest::Approx(std::exp(5.0 * (3.0 / std::sqrt(5.0) - 1.0))).epsilon(1e-12));
  CHECK(w == doctest::Approx(5.519).epsilon(1e-3));
}

TEST_CASE("coincident anchors are rejected") {
  CHECK_THROWS_AS(linearity_weight({0, 0}, {1, 1}, {2, 2}, {2, 2}, 5.0), DomainError);
}

TEST_CASE("linearity weight is rigid-motion invariant and swap symmetric") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0), ang(0.0, 2 * std::numbers::pi);
  for (int t = 0; t < 500; ++t) {
    const PointD p[4] = {{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const double w = linearity_weight(p[0], p[1], p[2], p[3], 2.0);
    CHECK(w >= 1.0);
    CHECK(linearity_weight(p[1], p[0], p[3], p[2], 2.0) == doctest::Approx(w).epsilon(1e-12));
    const double a = ang(rng), tx = u(rng), ty = u(rng);
    auto move = [&](PointD q) {
      return PointD{q.x * std::cos(a) - q.y * std::sin(a) + tx, q.x * std::sin(a) + q.y * std::cos(a) + ty};
    };
    CHECK(linearity_weight(move(p[0]), move(p[1]), move(p[2]), move(p[3]), 2.0) == doctest::Approx(w).epsilon(1e-9));
  }
}

TEST_CASE("graph has root, two endpoints per blob and the fixed edge sets") {
  const std::vector<BlobLine> blobs{scenario::bar(1, 10, 6, 10, 90), scenario::bar(2, 60, 6, 10, 60),
                                    scenario::bar(3, 110, 6, 10, 40)};
  const BinaryImage ink = scenario::ink_of(blobs, 120, 130);
  const MergeGraph g = build_merge_graph(blobs, ink, 4.0);
  CHECK(g.vertex_count == 7);
  CHECK(count_kind(g, EdgeKind::intra) == 3);
  CHECK(count_kind(g, EdgeKind::root) == 6);
  CHECK(count_kind(g, EdgeKind::cross) == 0);  // every gap exceeds the cap
  for (const auto& e : g.edges) {
    if (e.kind == EdgeKind::intra) CHECK(e.weight == 0.0);
    if (e.kind == EdgeKind::root && MergeGraph::blob_of(e.b) == 0) CHECK(e.weight == 1.0);
    if (e.kind == EdgeKind::root && MergeGraph::blob_of(e.b) != 0) CHECK(e.weight > 1.0);
  }
}

TEST_CASE("literal root weights are the raw support") {
  const std::vector<BlobLine> blobs{scenario::bar(1, 10, 6, 10, 90), scenario::bar(2, 60, 6, 10, 50)};
  const std::vector<double> support{1.0, 0.5};
  MergeParams p;
  p.literal_e2 = true;
  const MergeGraph g = build_merge_graph(blobs, support, 4.0, p);
  for (const auto& e : g.edges)
    if (e.kind == EdgeKind::root) CHECK(e.weight == support[MergeGraph::blob_of(e.b)]);
}

TEST_CASE("an endpoint keeps only its best cross edge") {
  // Blob 0 ends at column 100; blobs 1..3 start near that end in three directions.
  const std::vector<BlobLine> blobs{
      scenario::bar(1, 50, 5, 10, 100),
      scenario::bar(2, 50, 5, 110, 200),
      make_blob_line(3, oracle::rect_pixels(62, 104, 140, 108)),
      make_blob_line(4, oracle::rect_pixels(0, 104, 40, 108)),
  };
  const double scale = 4.0;
  const MergeGraph g = build_merge_graph(blobs, scenario::ink_of(blobs, 220, 150), scale);

  // Which vertex of blob 0 is its right end?
  const auto a0 = endpoint_anchors(blobs[0], static_cast<int>(std::lround(2 * scale)));
  const int end = a0[0].endpoint.col > a0[1].endpoint.col ? 0 : 1;
  const int vertex = MergeGraph::endpoint_vertex(0, end);

  double best = 1e300;
  int candidates = 0;
  for (int j = 1; j < 4; ++j) {
    const auto aj = endpoint_anchors(blobs[j], static_cast<int>(std::lround(2 * scale)));
    for (const auto& a : aj) {
      if (dist(a.endpoint, a0[end].endpoint) > 5 * scale) continue;
      ++candidates;
      best = std::min(best, linearity_weight(to_point(a0[end].endpoint), to_point(a.endpoint),
                                             to_point(a0[end].nearby), to_point(a.nearby), 5.0));
    }
  }
  CHECK(candidates == 3);
  int incident = 0;
  double weight = 0.0;
  std::vector<int> degree(static_cast<std::size_t>(g.vertex_count), 0);
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::cross) continue;
    ++degree[e.a];
    ++degree[e.b];
    if (e.a == vertex || e.b == vertex) {
      ++incident;
      weight = e.weight;
    }
  }
  CHECK(incident == 1);
  CHECK(weight == best);
  for (int d : degree) CHECK(d <= 1);
}

TEST_CASE("spanning tree matches enumeration on random small graphs") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const MergeGraph g = oracle::random_merge_graph(rng);
    const auto tree = minimum_spanning_tree(g);
    CHECK(static_cast<int>(tree.size()) == g.vertex_count - 1);
    CHECK(tree_weight(g, tree) == doctest::Approx(oracle::enumerate_mst_weight(g.vertex_count, g.edges)));
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (g.edges[e].kind == EdgeKind::intra) CHECK(std::find(tree.begin(), tree.end(), static_cast<int>(e)) != tree.end());
  }
}

TEST_CASE("scaling root weights can pull a cross edge into the tree") {
  MergeGraph g;
  g.vertex_count = 5;
  g.edges = {{1, 2, EdgeKind::intra, 0.0}, {3, 4, EdgeKind::intra, 0.0}, {0, 1, EdgeKind::root, 1.5},
             {0, 2, EdgeKind::root, 1.6}, {0, 3, EdgeKind::root, 1.7}, {0, 4, EdgeKind::root, 1.8},
             {2, 3, EdgeKind::cross, 2.0}};
  auto uses_cross = [](const MergeGraph& gr) {
    for (int e : minimum_spanning_tree(gr))
      if (gr.edges[e].kind == EdgeKind::cross) return true;
    return false;
  };
  CHECK_FALSE(uses_cross(g));
  for (auto& e : g.edges)
    if (e.kind == EdgeKind::root) e.weight *= 2.0;
  CHECK(uses_cross(g));
}

TEST_CASE("collinear fragments merge and distant parallel lines stay apart") {
  const double scale = 4.0;
  const std::vector<BlobLine> frag{scenario::bar(1, 50, 8, 20, 99), scenario::bar(2, 50, 8, 108, 187),
                                   scenario::bar(3, 150, 8, 20, 260)};
  const auto merged = mst_merge(build_merge_graph(frag, scenario::ink_of(frag, 300, 200), scale));
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].id == 1);
  CHECK(merged[1].id == 2);
  CHECK(merged[0].pixels.size() == frag[0].pixels.size() + frag[1].pixels.size());
  CHECK(merged[1].pixels == frag[2].pixels);
  // Endpoints of the union are the outermost member endpoints.
  CHECK(std::min(merged[0].endpoints[0].col, merged[0].endpoints[1].col) == std::min(frag[0].endpoints[0].col, frag[0].endpoints[1].col));
  CHECK(std::max(merged[0].endpoints[0].col, merged[0].endpoints[1].col) == std::max(frag[1].endpoints[0].col, frag[1].endpoints[1].col));

  const std::vector<BlobLine> par{scenario::bar(1, 50, 8, 20, 260), scenario::bar(2, 150, 8, 20, 260)};
  CHECK(mst_merge(build_merge_graph(par, scenario::ink_of(par, 300, 200), scale)).size() == 2);
}

TEST_CASE("merging keeps every input pixel") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    std::vector<BlobLine> blobs;
    for (int i = 0; i < 5; ++i) {
      const int top = static_cast<int>(rng() % 180), left = static_cast<int>(rng() % 200);
      blobs.push_back(scenario::bar(i + 1, top, 4 + static_cast<int>(rng() % 4), left, left + 20 + static_cast<int>(rng() % 60)));
    }
    const auto merged = mst_merge(build_merge_graph(blobs, scenario::ink_of(blobs, 300, 200), 4.0));
    std::set<Pixel> in, out;
    for (const auto& b : blobs) in.insert(b.pixels.begin(), b.pixels.end());
    for (const auto& b : merged) out.insert(b.pixels.begin(), b.pixels.end());
    CHECK(in == out);
  }
}

TEST_CASE("graph dump lists every edge with its kind") {
  MergeGraph g;
  g.vertex_count = 3;
  g.edges = {{1, 2, EdgeKind::intra, 0.0}, {0, 1, EdgeKind::root, 1.0}, {0, 2, EdgeKind::root, 2.5}};
  std::ostringstream out;
  write_graph_csv(out, g);
  CHECK(out.str() == "src,dst,kind,weight\n1,2,E1,0\n0,1,E2,1\n0,2,E2,2.5\n");
}
