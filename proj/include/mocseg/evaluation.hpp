#pragma once

#include <span>
#include <vector>

#include "mocseg/ground_truth.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

/// For each line, the sorted raster indices of the foreground pixels it covers.
struct LineMasks {
  int width = 0;
  int height = 0;
  std::vector<std::vector<int>> lines;
};

struct MatchedPair {
  int gt = 0;    // 1-based line id
  int pred = 0;  // 1-based line id
  double iu = 0.0;
  long tp = 0;  // foreground pixels in both
  long fp = 0;  // only in pred
  long fn = 0;  // only in gt
};

struct MatchTable {
  std::vector<MatchedPair> pairs;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  std::vector<long> gt_sizes;    // foreground count per gt line
  std::vector<long> pred_sizes;  // foreground count per pred line
};

struct PixelScore {
  double pixel_iu = 1.0;
  long tp = 0, fp = 0, fn = 0;
};

struct LineScore {
  double line_iu = 1.0;
  long cl = 0, ml = 0, el = 0;
};

struct PageScores {
  double pixel_iu = 1.0;
  double line_iu = 1.0;
  long tp = 0, fp = 0, fn = 0;
  long cl = 0, ml = 0, el = 0;
};

struct DatasetMeans {
  double pixel_iu = 0.0;
  double line_iu = 0.0;
};

LineMasks masks_from_polygons(const PolygonSet& polys, const BinaryImage& img);
/// Line k covers the foreground pixels labeled k.
LineMasks masks_from_labels(const LineLabeling& labeling, const BinaryImage& img);

/// Greedy one-to-one matching by descending IU; ties go to the lower gt id,
/// then the lower pred id. Pairs with zero IU never match.
MatchTable match_pairs(const LineMasks& gt, const LineMasks& pred);
MatchTable match_pairs(const PolygonSet& gt, const PolygonSet& pred, const BinaryImage& img);

PixelScore pixel_iu(const MatchTable& table);

/// A matched pair is correct when precision and recall both reach the
/// threshold; otherwise it is missed when recall falls short and extra when
/// precision does (both may apply).
LineScore line_iu(const MatchTable& table, double threshold = 0.75);

PageScores score_page(const MatchTable& table, double threshold = 0.75);
PageScores score_page(const LineMasks& gt, const LineMasks& pred, double threshold = 0.75);

/// Unweighted means. Throws DomainError when empty.
DatasetMeans dataset_means(std::span<const PageScores> pages);

}  // namespace mocseg
