#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mocseg/blob_lines.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

struct EndpointAnchor {
  Pixel endpoint;
  Pixel nearby;
};

enum class EdgeKind { intra, root, cross };

struct MergeEdge {
  int a = 0;
  int b = 0;
  EdgeKind kind = EdgeKind::intra;
  double weight = 0.0;
};

/// Vertex 0 is the root; blob i (0-based) owns endpoint vertices 2i+1 and 2i+2.
struct MergeGraph {
  int vertex_count = 1;
  std::vector<MergeEdge> edges;
  std::vector<BlobLine> blobs;

  static int endpoint_vertex(int blob_index, int end) { return 2 * blob_index + 1 + end; }
  static int blob_of(int vertex) { return (vertex - 1) / 2; }
};

struct MergeParams {
  double gamma_merge = 5.0;
  double anchor_factor = 2.0;  // anchor distance d = anchor_factor * max scale
  double cap_factor = 5.0;     // cross-edge length cap R = cap_factor * max scale
  bool literal_e2 = false;     // root edge weight = r instead of exp(gamma (1 - r))
};

/// One anchor per endpoint: the skeleton point d steps inward along the
/// longest skeleton path, clamped to the far end for short skeletons.
std::vector<EndpointAnchor> endpoint_anchors(const BlobLine& blob, int d);

/// exp(gamma * ((|s-u| + |u-v| + |v-t|) / |s-t| - 1)). Throws DomainError if s == t.
double linearity_weight(PointD u, PointD v, PointD s, PointD t, double gamma_merge);

MergeGraph build_merge_graph(std::span<const BlobLine> blobs, const BinaryImage& img,
                             double max_scale, const MergeParams& params = {});

/// Same graph from precomputed per-blob support values in [0, 1].
MergeGraph build_merge_graph(std::span<const BlobLine> blobs, std::span<const double> support,
                             double max_scale, const MergeParams& params = {});

/// Kruskal with ties ordered by (weight, lower vertex, higher vertex).
/// Returns indices into graph.edges.
std::vector<int> minimum_spanning_tree(const MergeGraph& graph);

/// Drops the root from the tree and unions the blobs of each remaining tree
/// component. Output ids are 1..K ordered by the lowest input blob index.
std::vector<BlobLine> mst_merge(const MergeGraph& graph);

/// CSV edge list: src,dst,kind,weight.
void write_graph_csv(std::ostream& out, const MergeGraph& graph);

}  // namespace mocseg
