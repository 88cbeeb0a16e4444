#pragma once

#include <span>
#include <vector>

#include "mocseg/grid.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

struct BankConfig {
  double orientation_step_deg = 5.0;
  int n_scales = 4;
  double aspect = 3.0;  // along-line std / cross-line std
  double niblack_k = 0.2;
  int niblack_window = 0;  // 0 selects the smallest odd size >= 4 x max scale
  double noise_floor = 0.05;
  bool baseline_mode = false;  // single orientation (0 deg)
};

/// Sampled negative second derivative, across the line direction, of a rotated
/// anisotropic Gaussian. Taps are scale-normalized (multiplied by scale^2) so
/// responses are comparable between scales, and shifted to sum to zero over
/// the 3-sigma elliptical support.
struct FilterKernel {
  double orientation = 0.0;  // degrees in [0, 180), measured from +x towards +y (rows)
  double scale = 1.0;        // cross-line standard deviation
  double aspect = 3.0;
  Grid<double> taps;         // odd width and height, centered

  int radius_x() const { return taps.width() / 2; }
  int radius_y() const { return taps.height() / 2; }
};

struct FilterBank {
  std::vector<FilterKernel> kernels;  // orientation-major: index = o * scales.size() + s
  std::vector<double> orientations;
  std::vector<double> scales;
  double orientation_step = 5.0;
  double aspect = 3.0;

  double max_scale() const;
};

struct ResponseField {
  Grid<double> response;         // clamped below at 0
  Grid<double> arg_orientation;  // degrees
  Grid<double> arg_scale;
  Grid<int> arg_index;           // index into FilterBank::kernels
};

struct BlobMask {
  BinaryImage bits;
};

/// Throws DomainError for scale <= 0 or aspect < 1.
FilterKernel build_kernel(double scale, double orientation_deg, double aspect);

/// Orientations {0, step, ...} below 180 (only 0 in baseline mode) crossed with
/// n_scales evenly spaced scales over [mu/2, (mu + sigma/2)/2].
FilterBank build_bank(const HeightStats& stats, const BankConfig& config);

/// Same bank construction from an explicit scale list.
FilterBank build_bank(std::span<const double> scales, const BankConfig& config);

/// Linear filtering of the ink indicator (fg = 1) with zero padding.
Grid<double> filter_image(const BinaryImage& img, const FilterKernel& kernel);

/// Per-pixel maximum over the bank; ties go to the lowest bank index.
ResponseField enhance(const BinaryImage& img, const FilterBank& bank);

int default_niblack_window(double max_scale);

/// Local threshold mean + k * std over a window x window neighbourhood
/// (clipped at the image border) combined with a global noise floor.
BlobMask niblack_binarize(const ResponseField& field, int window, double k,
                          double noise_floor = 0.05);

}  // namespace mocseg
