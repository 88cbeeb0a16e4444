#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mocseg/ground_truth.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

enum class LineKind { straight, arc, sine };

struct LineSpec {
  LineKind kind = LineKind::straight;
  double orientation = 0.0;  // degrees in [0, 180)
  double curvature = 0.0;    // arc: 1 / radius; sine: amplitude in pixels
  double length = 200.0;
  double stroke_height = 14.0;
  std::vector<double> word_gaps;
  std::optional<PointD> center;  // fixed placement instead of rejection sampling
};

struct PageSpec {
  std::string name = "page";
  int width = 600;
  int height = 600;
  std::vector<LineSpec> lines;
  std::uint64_t seed = 0;
};

struct SyntheticPage {
  BinaryImage image;
  LineLabeling truth;
};

/// Portable uniform variates on top of the 64-bit Mersenne Twister.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1) from the top 53 bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(unit() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Throws DomainError for invalid specs and PlacementError when a line cannot
/// be placed clear of earlier lines within 1000 attempts.
SyntheticPage generate_page(const PageSpec& spec);

struct RandomPageOptions {
  int width = 600;
  int height = 600;
  int n_straight = 4;
  int n_sine = 2;
  int n_arc = 0;
  double min_length = 220.0;
  double max_length = 300.0;
  double min_stroke = 12.0;
  double max_stroke = 15.0;
};

/// A page of randomly oriented lines; the orientations of the straight lines
/// are spread evenly across [0, 180) with a random offset.
PageSpec random_page_spec(std::uint64_t seed, const RandomPageOptions& options = {});

/// JSON forms: a single page object, {"pages": [...]}, or
/// {"dataset": {"count": N, "seed": S, ...RandomPageOptions fields}}.
std::vector<PageSpec> page_specs_from_json(const std::string& text);
std::string page_spec_to_json(const PageSpec& spec);

}  // namespace mocseg
