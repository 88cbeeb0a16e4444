#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mocseg/filter_bank.hpp"
#include "mocseg/grid.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

/// A connected blob hovering over one text line.
struct BlobLine {
  int id = 0;
  std::vector<Pixel> pixels;    // sorted in raster order
  std::vector<Pixel> skeleton;  // sorted in raster order, subset of pixels
  std::vector<Pixel> endpoints; // the two ends of the longest skeleton path
  double theta_pca = 0.0;       // degrees in [0, 180)

  PointD centroid() const;
};

struct SplineFit {
  int knots = 20;
  std::vector<double> segment_scores;
  double max_score = 0.0;
};

enum class Validity { valid, invalid };

struct Alignment {
  double theta = 0.0;          // degrees in [0, 180)
  PointD center;               // rotation center (pixel centroid)
  std::vector<PointD> aligned; // first principal axis along +x
};

struct LigatureCost {
  double theta_hist = 0.0;
  double theta_pca = 0.0;
  double log_cost = 0.0;
};

struct LigatureParams {
  double gamma = 50.0;
  double deviation_threshold_deg = 30.0;
  bool literal_ligature = false;  // gamma * (1 - |a - cos(b)|) in radians instead
};

/// Shared, fixed neighbourhood data for dominant-orientation lookups.
struct LigatureContext {
  BinaryImage blob_pixels;  // every blob pixel of the page
  double radius = 0.0;
  double orientation_step = 5.0;
};

// --- skeleton helpers --------------------------------------------------------

/// Iterative two-subpass thinning; the result is 8-connected and one pixel wide.
std::vector<Pixel> thin(std::span<const Pixel> pixels);

/// Number of distinct 8-connected runs of skeleton pixels around p.
int skeleton_branches(const std::vector<Pixel>& skeleton_sorted, Pixel p);

/// Pixels with at least three distinct skeleton branches around them.
std::vector<Pixel> bifurcation_points(std::span<const Pixel> skeleton);

/// Removes terminal branches shorter than min_length pixels.
std::vector<Pixel> prune_spurs(std::span<const Pixel> skeleton, int min_length);

/// Ordered pixels of the longest geodesic path through the skeleton.
std::vector<Pixel> skeleton_diameter_path(std::span<const Pixel> skeleton);

// --- blob lines --------------------------------------------------------------

/// Builds a BlobLine (skeleton, endpoints, orientation) from a connected pixel set.
BlobLine make_blob_line(int id, std::vector<Pixel> pixels);

/// 8-connected components of the blob mask, ids 1..N in scan order.
std::vector<BlobLine> extract_blob_lines(const BlobMask& mask);

/// Principal axis angle and the cloud rotated by -theta about its centroid.
/// Throws DomainError when all pixels coincide.
Alignment principal_orientation_and_align(std::span<const Pixel> pixels);

/// Piecewise least-squares line fits over `knots` uniform segments of the
/// aligned x-extent; a blob is valid iff the worst mean absolute residual is
/// below factor * max_scale.
std::pair<SplineFit, Validity> fit_and_classify(std::span<const PointD> aligned, double max_scale,
                                                int knots = 20, double factor = 0.8);

/// Splits a blob at the bifurcations of its skeleton. Each child owns the
/// skeleton arc between bifurcations plus the parent pixels geodesically
/// closest to that arc.
std::vector<BlobLine> skeletonize_and_decompose(const BlobLine& blob);

/// Number of blob pixels 8-adjacent to background (or the image border).
int blob_perimeter(const BlobLine& blob);

/// radius_factor * total_area / total_perimeter.
double ligature_radius(double total_area, double total_perimeter, double radius_factor = 18.0);

LigatureContext make_ligature_context(std::span<const BlobLine> blobs, int width, int height,
                                      double orientation_step, double radius_factor = 18.0);

/// Mode of arg_orientation over blob pixels within the context radius of the
/// blob centroid; falls back to theta_pca when no blob pixel is in range.
double dominant_local_orientation(const BlobLine& blob, const ResponseField& field,
                                  const LigatureContext& context);

/// gamma * (1 - |cos(theta_hist - theta_pca)|), the log of the label cost.
double ligature_log_cost(double theta_hist, double theta_pca, double gamma = 50.0,
                         bool literal = false);

LigatureCost ligature_cost(const BlobLine& blob, const ResponseField& field,
                           const LigatureContext& context, const LigatureParams& params);

/// Drops children whose orientation deviates from the local dominant
/// orientation by more than params.deviation_threshold_deg.
std::vector<BlobLine> remove_false_ligatures(std::span<const BlobLine> children,
                                             const ResponseField& field,
                                             const LigatureContext& context,
                                             const LigatureParams& params = {});

/// Fraction of image ink under each blob (dilated by half its mean
/// thickness), normalized by the best-supported blob. Values in [0, 1].
std::vector<double> blob_support(std::span<const BlobLine> blobs, const BinaryImage& img);

}  // namespace mocseg
