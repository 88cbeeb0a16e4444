#include "mocseg/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

double nearest_pixel_distance(PointD p, const BlobLine& blob) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : blob.pixels) {
    const double dx = q.col - p.x, dy = q.row - p.y;
    best = std::min(best, dx * dx + dy * dy);
  }
  return std::sqrt(best);
}

double percentile(std::vector<double> v, double pct) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(pct / 100.0 * static_cast<double>(v.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(v.size()))) - 1;
  return v[idx];
}

}  // namespace

EnergyProblem build_assignment_problem(std::span<const ConnectedComponent> components,
                                       std::span<const BlobLine> blobs, std::span<const double> support,
                                       const AssignParams& params) {
  const int n = static_cast<int>(components.size());
  const int m = static_cast<int>(blobs.size());
  EnergyProblem p(n, m + 1);

  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < m; ++l) {
      const double d = nearest_pixel_distance(components[i].centroid, blobs[l]);
      p.data(i, l + 1) = d;
      all.push_back(d);
    }
  const double discard = percentile(std::move(all), params.discard_percentile);
  for (int i = 0; i < n; ++i) p.data(i, 0) = discard;

  p.label_cost[0] = 0.0;
  for (int l = 0; l < m; ++l) p.label_cost[l + 1] = std::exp(params.beta * support[l]);

  if (n >= 2 && params.knn_k > 0) {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> nn(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < n; ++i) {
      order.clear();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = components[i].centroid.x - components[j].centroid.x;
        const double dy = components[i].centroid.y - components[j].centroid.y;
        order.emplace_back(std::hypot(dx, dy), j);
      }
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.knn_k), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
      nn[i] = order.front().first;
      for (std::size_t t = 0; t < k; ++t) pairs.emplace_back(std::min(i, order[t].second), std::max(i, order[t].second));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    double alpha = params.alpha;
    if (alpha <= 0.0) {
      double mean = 0.0;
      for (double d : nn) mean += d;
      mean /= n;
      alpha = mean > 0.0 ? 1.0 / mean : 1.0;
    }
    for (const auto& [a, b] : pairs) {
      const double dx = components[a].centroid.x - components[b].centroid.x;
      const double dy = components[a].centroid.y - components[b].centroid.y;
      p.neighbors.push_back({a, b, std::exp(-alpha * std::hypot(dx, dy))});
    }
  }
  return p;
}

LineLabeling assign_components(std::span<const ConnectedComponent> components, std::span<const BlobLine> blobs,
                               const BinaryImage& img, const AssignParams& params) {
  LineLabeling out(img.width(), img.height());
  if (blobs.empty() || components.empty()) return out;

  const auto support = blob_support(blobs, img);
  const EnergyProblem problem = build_assignment_problem(components, blobs, support, params);
  const Labeling f = minimize_labeling(problem);

  std::vector<int> renumber(blobs.size() + 1, 0);
  for (int l : f.assignment)
    if (l > 0) renumber[l] = 1;
  int next = 0;
  for (auto& r : renumber)
    if (r) r = ++next;
  out.n_lines = next;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const int id = renumber[f.assignment[i]];
    if (!id) continue;
    for (const auto& px : components[i].pixels) out.labels[px] = id;
  }
  return out;
}

}  // namespace mocseg
