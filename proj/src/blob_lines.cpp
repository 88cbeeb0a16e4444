#include "mocseg/blob_lines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

double fold_180(double deg) {
  double d = std::fmod(deg, 180.0);
  if (d < 0.0) d += 180.0;
  if (d >= 180.0) d -= 180.0;
  return d;
}

struct Moments {
  double cx = 0, cy = 0, sxx = 0, syy = 0, sxy = 0;
};

Moments moments(std::span<const Pixel> pixels) {
  Moments m;
  const double n = static_cast<double>(pixels.size());
  for (const auto& p : pixels) {
    m.cx += p.col;
    m.cy += p.row;
  }
  m.cx /= n;
  m.cy /= n;
  for (const auto& p : pixels) {
    const double dx = p.col - m.cx, dy = p.row - m.cy;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

double principal_angle(const Moments& m) {
  return fold_180(0.5 * std::atan2(2.0 * m.sxy, m.sxx - m.syy) * kDeg);
}

}  // namespace

PointD BlobLine::centroid() const {
  if (pixels.empty()) return {};
  const Moments m = moments(pixels);
  return {m.cx, m.cy};
}

int blob_perimeter(const BlobLine& blob) {
  int n = 0;
  for (const auto& p : blob.pixels) {
    bool edge = false;
    for (int dr = -1; dr <= 1 && !edge; ++dr)
      for (int dc = -1; dc <= 1 && !edge; ++dc)
        if ((dr || dc) &&
            !std::binary_search(blob.pixels.begin(), blob.pixels.end(), Pixel{p.row + dr, p.col + dc}))
          edge = true;
    n += edge;
  }
  return n;
}

BlobLine make_blob_line(int id, std::vector<Pixel> pixels) {
  BlobLine b;
  b.id = id;
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  b.pixels = std::move(pixels);
  if (b.pixels.empty()) return b;

  const int perimeter = std::max(1, blob_perimeter(b));
  const double thickness = 2.0 * static_cast<double>(b.pixels.size()) / perimeter;
  b.skeleton = prune_spurs(thin(b.pixels), static_cast<int>(std::lround(thickness)));
  const auto path = skeleton_diameter_path(b.skeleton);
  b.endpoints = {path.front(), path.back()};

  const Moments m = moments(b.pixels);
  b.theta_pca = (m.sxx + m.syy > 0.0) ? principal_angle(m) : 0.0;
  return b;
}

std::vector<BlobLine> extract_blob_lines(const BlobMask& mask) {
  int n = 0;
  const Grid<int> labels = label_components(mask.bits.bits(), &n);
  std::vector<std::vector<Pixel>> groups(static_cast<std::size_t>(n));
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c)
      if (labels(r, c)) groups[labels(r, c) - 1].push_back({r, c});
  std::vector<BlobLine> out;
  out.reserve(groups.size());
  for (int i = 0; i < n; ++i) out.push_back(make_blob_line(i + 1, std::move(groups[i])));
  return out;
}

Alignment principal_orientation_and_align(std::span<const Pixel> pixels) {
  if (pixels.empty()) throw DomainError("principal orientation of an empty pixel set");
  const Moments m = moments(pixels);
  if (!(m.sxx + m.syy > 0.0)) throw DomainError("principal orientation undefined: all pixels coincide");
  Alignment a;
  a.theta = principal_angle(m);
  a.center = {m.cx, m.cy};
  const double t = a.theta / kDeg;
  // Rotation by -theta: [cos(-t) -sin(-t); sin(-t) cos(-t)].
  const double c = std::cos(-t);
  const double s = std::sin(-t);
  a.aligned.reserve(pixels.size());
  for (const auto& p : pixels) {
    const double dx = p.col - m.cx, dy = p.row - m.cy;
    a.aligned.push_back({m.cx + c * dx - s * dy, m.cy + s * dx + c * dy});
  }
  return a;
}

std::pair<SplineFit, Validity> fit_and_classify(std::span<const PointD> aligned, double max_scale,
                                                int knots, double factor) {
  SplineFit fit;
  fit.knots = knots;
  fit.segment_scores.assign(static_cast<std::size_t>(knots), 0.0);
  if (aligned.empty() || knots <= 0) return {fit, Validity::valid};

  double xmin = aligned.front().x, xmax = xmin;
  for (const auto& p : aligned) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  const double width = (xmax - xmin) / knots;
  std::vector<std::vector<PointD>> seg(static_cast<std::size_t>(knots));
  for (const auto& p : aligned) {
    int i = width > 0.0 ? static_cast<int>((p.x - xmin) / width) : 0;
    i = std::clamp(i, 0, knots - 1);
    seg[i].push_back(p);
  }

  for (int i = 0; i < knots; ++i) {
    const auto& pts = seg[i];
    if (pts.size() < 2) continue;
    const double n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (const auto& p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (const auto& p : pts) {
      sxx += (p.x - mx) * (p.x - mx);
      sxy += (p.x - mx) * (p.y - my);
    }
    const double slope = sxx > 1e-12 ? sxy / sxx : 0.0;
    double l1 = 0;
    for (const auto& p : pts) l1 += std::abs(p.y - (my + slope * (p.x - mx)));
    fit.segment_scores[i] = l1 / n;
  }
  fit.max_score = *std::max_element(fit.segment_scores.begin(), fit.segment_scores.end());
  const Validity v = fit.max_score < factor * max_scale ? Validity::valid : Validity::invalid;
  return {fit, v};
}

std::vector<BlobLine> skeletonize_and_decompose(const BlobLine& blob) {
  const std::vector<Pixel> forks = bifurcation_points(blob.skeleton);
  if (forks.empty()) return {blob};

  // Arm pixels beside a fork touch each other diagonally, so the cut takes the
  // fork's whole 3x3 neighbourhood out of the skeleton.
  std::vector<Pixel> cut;
  for (const auto& f : forks)
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) cut.push_back({f.row + dr, f.col + dc});
  std::sort(cut.begin(), cut.end());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  std::vector<Pixel> rest;
  std::set_difference(blob.skeleton.begin(), blob.skeleton.end(), cut.begin(), cut.end(),
                      std::back_inserter(rest));
  if (rest.empty()) return {blob};

  // Local rasters over the blob's bounding box.
  int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
  for (const auto& p : blob.pixels) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col);
  }
  const int w = c1 - c0 + 1, h = r1 - r0 + 1;
  Grid<std::uint8_t> inside(w, h, 0);
  for (const auto& p : blob.pixels) inside(p.row - r0, p.col - c0) = 1;
  Grid<std::uint8_t> arc_bits(w, h, 0);
  for (const auto& p : rest) arc_bits(p.row - r0, p.col - c0) = 1;

  int n_arcs = 0;
  Grid<int> arc_label = label_components(arc_bits, &n_arcs);

  // Hand the cut arm pixels back to the arc they continue, preferring 4-neighbours.
  const Grid<int> seed_label = arc_label;
  for (const auto& p : cut) {
    if (!std::binary_search(blob.skeleton.begin(), blob.skeleton.end(), p) ||
        std::binary_search(forks.begin(), forks.end(), p))
      continue;
    const int r = p.row - r0, c = p.col - c0;
    int best = 0, best_rank = 3;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (!seed_label.contains(r + dr, c + dc)) continue;
        const int l = seed_label(r + dr, c + dc);
        const int rank = std::abs(dr) + std::abs(dc);
        if (l && (rank < best_rank || (rank == best_rank && l < best))) {
          best = l;
          best_rank = rank;
        }
      }
    arc_label(r, c) = best;
  }

  // Geodesic Voronoi partition of the blob pixels around the arcs.
  Grid<int> owner(w, h, 0);
  std::deque<std::pair<int, int>> queue;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (arc_label(r, c)) {
        owner(r, c) = arc_label(r, c);
        queue.emplace_back(r, c);
      }
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr, cc = c + dc;
        if (!inside.contains(rr, cc) || !inside(rr, cc) || owner(rr, cc)) continue;
        owner(rr, cc) = owner(r, c);
        queue.emplace_back(rr, cc);
      }
  }

  std::vector<std::vector<Pixel>> px(static_cast<std::size_t>(n_arcs));
  std::vector<std::vector<Pixel>> sk(static_cast<std::size_t>(n_arcs));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (owner(r, c)) px[owner(r, c) - 1].push_back({r + r0, c + c0});
      if (arc_label(r, c)) sk[arc_label(r, c) - 1].push_back({r + r0, c + c0});
    }

  std::vector<BlobLine> children;
  children.reserve(static_cast<std::size_t>(n_arcs));
  for (int i = 0; i < n_arcs; ++i) {
    BlobLine child;
    child.id = i + 1;
    child.pixels = std::move(px[i]);
    child.skeleton = std::move(sk[i]);
    const auto path = skeleton_diameter_path(child.skeleton);
    child.endpoints = {path.front(), path.back()};
    const Moments m = moments(child.pixels);
    child.theta_pca = (m.sxx + m.syy > 0.0) ? principal_angle(m) : 0.0;
    children.push_back(std::move(child));
  }
  return children;
}

double ligature_radius(double total_area, double total_perimeter, double radius_factor) {
  if (!(total_perimeter > 0.0)) return 0.0;
  return radius_factor * total_area / total_perimeter;
}

LigatureContext make_ligature_context(std::span<const BlobLine> blobs, int width, int height,
                                      double orientation_step, double radius_factor) {
  LigatureContext ctx;
  ctx.blob_pixels = BinaryImage(width, height);
  ctx.orientation_step = orientation_step;
  double area = 0.0, perimeter = 0.0;
  for (const auto& b : blobs) {
    for (const auto& p : b.pixels) ctx.blob_pixels.set(p);
    area += static_cast<double>(b.pixels.size());
    perimeter += blob_perimeter(b);
  }
  ctx.radius = ligature_radius(area, perimeter, radius_factor);
  return ctx;
}

double dominant_local_orientation(const BlobLine& blob, const ResponseField& field,
                                  const LigatureContext& context) {
  const int bins = std::max(1, static_cast<int>(std::lround(180.0 / context.orientation_step)));
  std::vector<long> hist(static_cast<std::size_t>(bins), 0);
  const PointD c = blob.centroid();
  const double r = context.radius;
  const int row0 = std::max(0, static_cast<int>(std::floor(c.y - r)));
  const int row1 = std::min(field.response.height() - 1, static_cast<int>(std::ceil(c.y + r)));
  const int col0 = std::max(0, static_cast<int>(std::floor(c.x - r)));
  const int col1 = std::min(field.response.width() - 1, static_cast<int>(std::ceil(c.x + r)));
  long total = 0;
  for (int row = row0; row <= row1; ++row) {
    for (int col = col0; col <= col1; ++col) {
      const double dx = col - c.x, dy = row - c.y;
      if (dx * dx + dy * dy > r * r) continue;
      if (!context.blob_pixels.at(row, col)) continue;
      int bin = static_cast<int>(std::lround(field.arg_orientation(row, col) / context.orientation_step));
      bin = ((bin % bins) + bins) % bins;
      ++hist[bin];
      ++total;
    }
  }
  if (total == 0) return blob.theta_pca;
  const auto peak = std::max_element(hist.begin(), hist.end()) - hist.begin();
  return static_cast<double>(peak) * context.orientation_step;
}

double ligature_log_cost(double theta_hist, double theta_pca, double gamma, bool literal) {
  const double a = theta_hist / kDeg;
  const double b = theta_pca / kDeg;
  if (literal) return gamma * (1.0 - std::abs(a - std::cos(b)));
  return gamma * (1.0 - std::abs(std::cos(a - b)));
}

LigatureCost ligature_cost(const BlobLine& blob, const ResponseField& field,
                           const LigatureContext& context, const LigatureParams& params) {
  LigatureCost cost;
  cost.theta_hist = dominant_local_orientation(blob, field, context);
  cost.theta_pca = blob.theta_pca;
  cost.log_cost = ligature_log_cost(cost.theta_hist, cost.theta_pca, params.gamma, params.literal_ligature);
  return cost;
}

std::vector<BlobLine> remove_false_ligatures(std::span<const BlobLine> children,
                                             const ResponseField& field,
                                             const LigatureContext& context,
                                             const LigatureParams& params) {
  const double tau = params.gamma * (1.0 - std::cos(params.deviation_threshold_deg / kDeg));
  std::vector<BlobLine> kept;
  for (const auto& child : children) {
    if (ligature_cost(child, field, context, params).log_cost > tau) continue;
    kept.push_back(child);
  }
  return kept;
}

std::vector<double> blob_support(std::span<const BlobLine> blobs, const BinaryImage& img) {
  std::vector<double> support(blobs.size(), 0.0);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    if (b.pixels.empty()) continue;
    const int perimeter = std::max(1, blob_perimeter(b));
    const double thickness = 2.0 * static_cast<double>(b.pixels.size()) / perimeter;
    const int radius = std::max(1, static_cast<int>(std::lround(thickness / 2.0)));

    int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
    for (const auto& p : b.pixels) {
      r0 = std::min(r0, p.row);
      r1 = std::max(r1, p.row);
      c0 = std::min(c0, p.col);
      c1 = std::max(c1, p.col);
    }
    r0 -= radius;
    c0 -= radius;
    r1 += radius;
    c1 += radius;
    cv::Mat local = cv::Mat::zeros(r1 - r0 + 1, c1 - c0 + 1, CV_8U);
    for (const auto& p : b.pixels) local.at<std::uint8_t>(p.row - r0, p.col - c0) = 1;
    cv::Mat grown;
    cv::dilate(local, grown,
               cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(2 * radius + 1, 2 * radius + 1)));
    long count = 0;
    for (int r = 0; r < grown.rows; ++r)
      for (int c = 0; c < grown.cols; ++c) {
        const int row = r + r0, col = c + c0;
        if (grown.at<std::uint8_t>(r, c) && img.contains(row, col) && img.at(row, col)) ++count;
      }
    support[i] = static_cast<double>(count);
  }
  const double best = support.empty() ? 0.0 : *std::max_element(support.begin(), support.end());
  if (best > 0.0)
    for (auto& s : support) s /= best;
  return support;
}

}  // namespace mocseg
