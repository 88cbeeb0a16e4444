#include "mocseg/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

constexpr double kSupportSigmas = 3.0;

double fold_180(double deg) {
  double d = std::fmod(deg, 180.0);
  if (d < 0.0) d += 180.0;
  if (d >= 180.0) d -= 180.0;
  return d;
}

cv::Mat ink_indicator(const BinaryImage& img) {
  cv::Mat src(img.height(), img.width(), CV_64F);
  for (int r = 0; r < img.height(); ++r) {
    auto* row = src.ptr<double>(r);
    for (int c = 0; c < img.width(); ++c) row[c] = img.at(r, c) ? 1.0 : 0.0;
  }
  return src;
}

cv::Mat kernel_mat(const FilterKernel& k) {
  cv::Mat m(k.taps.height(), k.taps.width(), CV_64F);
  for (int r = 0; r < k.taps.height(); ++r)
    for (int c = 0; c < k.taps.width(); ++c) m.at<double>(r, c) = k.taps(r, c);
  return m;
}

// The kernels are point-symmetric, so correlation (what filter2D computes)
// equals convolution.
cv::Mat apply_kernel(const cv::Mat& src, const FilterKernel& k) {
  cv::Mat dst;
  cv::filter2D(src, dst, CV_64F, kernel_mat(k), cv::Point(k.radius_x(), k.radius_y()), 0.0,
               cv::BORDER_CONSTANT);
  return dst;
}

}  // namespace

double FilterBank::max_scale() const {
  return scales.empty() ? 0.0 : *std::max_element(scales.begin(), scales.end());
}

FilterKernel build_kernel(double scale, double orientation_deg, double aspect) {
  if (!(scale > 0.0)) throw DomainError("kernel scale must be positive");
  if (!(aspect >= 1.0)) throw DomainError("kernel aspect must be at least 1");

  FilterKernel k;
  k.orientation = fold_180(orientation_deg);
  k.scale = scale;
  k.aspect = aspect;

  const double theta = k.orientation * std::numbers::pi / 180.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double s_cross = scale;
  const double s_along = aspect * scale;

  const int rx = static_cast<int>(
      std::ceil(kSupportSigmas * std::sqrt(s_along * s_along * ct * ct + s_cross * s_cross * st * st)));
  const int ry = static_cast<int>(
      std::ceil(kSupportSigmas * std::sqrt(s_along * s_along * st * st + s_cross * s_cross * ct * ct)));
  k.taps = Grid<double>(2 * rx + 1, 2 * ry + 1, 0.0);

  const double norm = 1.0 / (2.0 * std::numbers::pi * s_along * s_cross);
  const double limit = kSupportSigmas * kSupportSigmas;
  double sum = 0.0;
  int support = 0;
  for (int dy = -ry; dy <= ry; ++dy) {
    for (int dx = -rx; dx <= rx; ++dx) {
      const double u = dx * ct + dy * st;
      const double v = -dx * st + dy * ct;
      const double q = (u / s_along) * (u / s_along) + (v / s_cross) * (v / s_cross);
      if (q > limit) continue;
      const double tap = (1.0 - (v * v) / (s_cross * s_cross)) * std::exp(-0.5 * q) * norm;
      k.taps(dy + ry, dx + rx) = tap;
      sum += tap;
      ++support;
    }
  }
  const double mean = sum / support;
  for (int dy = -ry; dy <= ry; ++dy) {
    for (int dx = -rx; dx <= rx; ++dx) {
      const double u = dx * ct + dy * st;
      const double v = -dx * st + dy * ct;
      const double q = (u / s_along) * (u / s_along) + (v / s_cross) * (v / s_cross);
      if (q <= limit) k.taps(dy + ry, dx + rx) -= mean;
    }
  }
  return k;
}

FilterBank build_bank(std::span<const double> scales, const BankConfig& config) {
  if (!(config.orientation_step_deg > 0.0)) throw DomainError("orientation step must be positive");
  FilterBank bank;
  bank.orientation_step = config.orientation_step_deg;
  bank.aspect = config.aspect;
  bank.scales.assign(scales.begin(), scales.end());
  if (config.baseline_mode) {
    bank.orientations = {0.0};
  } else {
    for (int i = 0;; ++i) {
      const double o = i * config.orientation_step_deg;
      if (o >= 180.0 - 1e-9) break;
      bank.orientations.push_back(o);
    }
  }
  for (double o : bank.orientations)
    for (double s : bank.scales) bank.kernels.push_back(build_kernel(s, o, config.aspect));
  return bank;
}

FilterBank build_bank(const HeightStats& stats, const BankConfig& config) {
  if (!(stats.mu > 0.0)) throw DomainError("height statistics must have positive mean");
  const auto [lo, hi] = scale_range(stats);
  std::vector<double> scales;
  if (hi - lo <= 1e-12 || config.n_scales <= 1) {
    scales.push_back(lo);
  } else {
    for (int i = 0; i < config.n_scales; ++i)
      scales.push_back(lo + (hi - lo) * i / (config.n_scales - 1));
  }
  return build_bank(scales, config);
}

Grid<double> filter_image(const BinaryImage& img, const FilterKernel& kernel) {
  const cv::Mat out = apply_kernel(ink_indicator(img), kernel);
  Grid<double> g(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    const auto* row = out.ptr<double>(r);
    std::copy(row, row + img.width(), &g(r, 0));
  }
  return g;
}

ResponseField enhance(const BinaryImage& img, const FilterBank& bank) {
  if (bank.kernels.empty()) throw DomainError("filter bank is empty");
  const int w = img.width();
  const int h = img.height();
  const cv::Mat src = ink_indicator(img);

  Grid<double> best(w, h, -std::numeric_limits<double>::infinity());
  Grid<int> best_index(w, h, 0);
  for (std::size_t i = 0; i < bank.kernels.size(); ++i) {
    const cv::Mat out = apply_kernel(src, bank.kernels[i]);
    for (int r = 0; r < h; ++r) {
      const auto* row = out.ptr<double>(r);
      for (int c = 0; c < w; ++c) {
        if (row[c] > best(r, c)) {
          best(r, c) = row[c];
          best_index(r, c) = static_cast<int>(i);
        }
      }
    }
  }

  ResponseField field;
  field.response = Grid<double>(w, h, 0.0);
  field.arg_orientation = Grid<double>(w, h, 0.0);
  field.arg_scale = Grid<double>(w, h, 0.0);
  field.arg_index = best_index;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto& k = bank.kernels[best_index(r, c)];
      field.response(r, c) = std::max(0.0, best(r, c));
      field.arg_orientation(r, c) = k.orientation;
      field.arg_scale(r, c) = k.scale;
    }
  }
  return field;
}

int default_niblack_window(double max_scale) {
  int w = static_cast<int>(std::ceil(4.0 * max_scale - 1e-9));
  if (w < 3) w = 3;
  if (w % 2 == 0) ++w;
  return w;
}

BlobMask niblack_binarize(const ResponseField& field, int window, double k, double noise_floor) {
  if (window < 3 || window % 2 == 0) throw DomainError("Niblack window must be odd and >= 3");
  const Grid<double>& resp = field.response;
  const int w = resp.width();
  const int h = resp.height();
  BlobMask mask{BinaryImage(w, h)};

  double gmax = 0.0;
  for (double v : resp.values()) gmax = std::max(gmax, v);
  if (gmax <= 0.0) return mask;
  const double floor_value = noise_floor * gmax;

  // Summed-area tables with one row/column of zero padding.
  std::vector<long double> s1(static_cast<std::size_t>(w + 1) * (h + 1), 0.0L);
  std::vector<long double> s2(s1.size(), 0.0L);
  auto at = [w](int r, int c) { return static_cast<std::size_t>(r) * (w + 1) + c; };
  for (int r = 0; r < h; ++r) {
    long double row1 = 0.0L, row2 = 0.0L;
    for (int c = 0; c < w; ++c) {
      const long double v = resp(r, c);
      row1 += v;
      row2 += v * v;
      s1[at(r + 1, c + 1)] = s1[at(r, c + 1)] + row1;
      s2[at(r + 1, c + 1)] = s2[at(r, c + 1)] + row2;
    }
  }

  const int half = window / 2;
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(0, r - half);
    const int r1 = std::min(h - 1, r + half);
    for (int c = 0; c < w; ++c) {
      const double v = resp(r, c);
      if (!(v > floor_value)) continue;
      const int c0 = std::max(0, c - half);
      const int c1 = std::min(w - 1, c + half);
      const long double n = static_cast<long double>(r1 - r0 + 1) * (c1 - c0 + 1);
      const long double sum = s1[at(r1 + 1, c1 + 1)] - s1[at(r0, c1 + 1)] - s1[at(r1 + 1, c0)] + s1[at(r0, c0)];
      const long double sq = s2[at(r1 + 1, c1 + 1)] - s2[at(r0, c1 + 1)] - s2[at(r1 + 1, c0)] + s2[at(r0, c0)];
      const double mean = static_cast<double>(sum / n);
      const double var = static_cast<double>(sq / n - (sum / n) * (sum / n));
      bool blob;
      if (var <= 1e-10 * mean * mean) {
        // Zero-variance window: compare against the mean alone, beyond rounding.
        blob = v > mean + 1e-9 * std::abs(mean);
      } else {
        blob = v > mean + k * std::sqrt(var);
      }
      if (blob) mask.bits.set(r, c);
    }
  }
  return mask;
}

}  // namespace mocseg
