#include "mocseg/evaluation.hpp"

#include <algorithm>
#include <tuple>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

long intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  long n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double ratio(long num, long den) { return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 1.0; }

}  // namespace

LineMasks masks_from_polygons(const PolygonSet& polys, const BinaryImage& img) {
  LineMasks m{img.width(), img.height(), {}};
  for (const auto& poly : polys.polygons) {
    const auto cover = rasterize_polygon(poly, img.width(), img.height());
    std::vector<int> px;
    for (int r = 0; r < img.height(); ++r)
      for (int c = 0; c < img.width(); ++c)
        if (cover(r, c) && img.at(r, c)) px.push_back(r * img.width() + c);
    m.lines.push_back(std::move(px));
  }
  return m;
}

LineMasks masks_from_labels(const LineLabeling& labeling, const BinaryImage& img) {
  LineMasks m{img.width(), img.height(), std::vector<std::vector<int>>(static_cast<std::size_t>(labeling.n_lines))};
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      const int l = labeling.labels(r, c);
      if (l > 0 && l <= labeling.n_lines && img.at(r, c)) m.lines[l - 1].push_back(r * img.width() + c);
    }
  return m;
}

MatchTable match_pairs(const LineMasks& gt, const LineMasks& pred) {
  MatchTable t;
  const int g = static_cast<int>(gt.lines.size()), p = static_cast<int>(pred.lines.size());
  for (const auto& l : gt.lines) t.gt_sizes.push_back(static_cast<long>(l.size()));
  for (const auto& l : pred.lines) t.pred_sizes.push_back(static_cast<long>(l.size()));

  struct Candidate {
    double iu;
    int gi, pi;
    long inter;
  };
  std::vector<Candidate> cand;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < p; ++j) {
      const long inter = intersection_size(gt.lines[i], pred.lines[j]);
      if (inter == 0) continue;
      const long uni = t.gt_sizes[i] + t.pred_sizes[j] - inter;
      cand.push_back({static_cast<double>(inter) / static_cast<double>(uni), i, j, inter});
    }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iu != b.iu) return a.iu > b.iu;
    return std::tie(a.gi, a.pi) < std::tie(b.gi, b.pi);
  });
  std::vector<char> gt_used(static_cast<std::size_t>(g), 0), pred_used(static_cast<std::size_t>(p), 0);
  for (const auto& c : cand) {
    if (gt_used[c.gi] || pred_used[c.pi]) continue;
    gt_used[c.gi] = pred_used[c.pi] = 1;
    t.pairs.push_back({c.gi + 1, c.pi + 1, c.iu, c.inter, t.pred_sizes[c.pi] - c.inter, t.gt_sizes[c.gi] - c.inter});
  }
  for (int i = 0; i < g; ++i)
    if (!gt_used[i]) t.unmatched_gt.push_back(i + 1);
  for (int j = 0; j < p; ++j)
    if (!pred_used[j]) t.unmatched_pred.push_back(j + 1);
  return t;
}

MatchTable match_pairs(const PolygonSet& gt, const PolygonSet& pred, const BinaryImage& img) {
  return match_pairs(masks_from_polygons(gt, img), masks_from_polygons(pred, img));
}

PixelScore pixel_iu(const MatchTable& table) {
  PixelScore s;
  for (const auto& pr : table.pairs) {
    s.tp += pr.tp;
    s.fp += pr.fp;
    s.fn += pr.fn;
  }
  for (int id : table.unmatched_gt) s.fn += table.gt_sizes[id - 1];
  for (int id : table.unmatched_pred) s.fp += table.pred_sizes[id - 1];
  s.pixel_iu = ratio(s.tp, s.tp + s.fp + s.fn);
  return s;
}

LineScore line_iu(const MatchTable& table, double threshold) {
  LineScore s;
  for (const auto& pr : table.pairs) {
    const double precision = ratio(pr.tp, pr.tp + pr.fp);
    const double recall = ratio(pr.tp, pr.tp + pr.fn);
    if (precision >= threshold && recall >= threshold) {
      ++s.cl;
      continue;
    }
    if (recall < threshold) ++s.ml;
    if (precision < threshold) ++s.el;
  }
  s.ml += static_cast<long>(table.unmatched_gt.size());
  s.el += static_cast<long>(table.unmatched_pred.size());
  s.line_iu = ratio(s.cl, s.cl + s.ml + s.el);
  return s;
}

PageScores score_page(const MatchTable& table, double threshold) {
  const PixelScore px = pixel_iu(table);
  const LineScore ln = line_iu(table, threshold);
  return {px.pixel_iu, ln.line_iu, px.tp, px.fp, px.fn, ln.cl, ln.ml, ln.el};
}

PageScores score_page(const LineMasks& gt, const LineMasks& pred, double threshold) {
  return score_page(match_pairs(gt, pred), threshold);
}

DatasetMeans dataset_means(std::span<const PageScores> pages) {
  if (pages.empty()) throw DomainError("dataset means need at least one page");
  DatasetMeans m;
  for (const auto& p : pages) {
    m.pixel_iu += p.pixel_iu;
    m.line_iu += p.line_iu;
  }
  m.pixel_iu /= static_cast<double>(pages.size());
  m.line_iu /= static_cast<double>(pages.size());
  return m;
}

}  // namespace mocseg
