#include "mocseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

constexpr int kMaxAttempts = 1000;
constexpr double kClearance = 1.5;  // in stroke heights
constexpr int kMargin = 4;

struct Frame {
  PointD pos;
  PointD tangent;  // unit-free; normalized by the caller
};

class LinePath {
 public:
  LinePath(const LineSpec& spec, PointD center) : spec_(spec), c_(center) {
    const double t = spec.orientation * std::numbers::pi / 180.0;
    d_ = {std::cos(t), std::sin(t)};
    n_ = {-d_.y, d_.x};
  }

  Frame at(double s) const {
    switch (spec_.kind) {
      case LineKind::arc: {
        const double k = spec_.curvature;
        if (k == 0.0) break;
        const double a = std::sin(k * s) / k, b = (1.0 - std::cos(k * s)) / k;
        const double ca = std::cos(k * s), sa = std::sin(k * s);
        return {{c_.x + a * d_.x + b * n_.x, c_.y + a * d_.y + b * n_.y},
                {ca * d_.x + sa * n_.x, ca * d_.y + sa * n_.y}};
      }
      case LineKind::sine: {
        const double amp = spec_.curvature;
        const double w = 2.0 * std::numbers::pi / spec_.length;
        const double off = amp * std::sin(w * s);
        const double slope = amp * w * std::cos(w * s);
        return {{c_.x + s * d_.x + off * n_.x, c_.y + s * d_.y + off * n_.y},
                {d_.x + slope * n_.x, d_.y + slope * n_.y}};
      }
      case LineKind::straight:
        break;
    }
    return {{c_.x + s * d_.x, c_.y + s * d_.y}, d_};
  }

 private:
  LineSpec spec_;
  PointD c_;
  PointD d_;
  PointD n_;
};

// Fills the rotated rectangle [-half_w, half_w] x [-below, above] in the
// (tangent, normal) frame around pos.
void stamp_dash(std::vector<Pixel>& out, PointD pos, PointD tan, double half_w, double above, double below) {
  const PointD nrm{-tan.y, tan.x};
  const double reach = std::hypot(half_w, std::max(above, below)) + 1.0;
  const int r0 = static_cast<int>(std::floor(pos.y - reach)), r1 = static_cast<int>(std::ceil(pos.y + reach));
  const int c0 = static_cast<int>(std::floor(pos.x - reach)), c1 = static_cast<int>(std::ceil(pos.x + reach));
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      const double dx = c - pos.x, dy = r - pos.y;
      const double u = dx * tan.x + dy * tan.y;
      const double v = dx * nrm.x + dy * nrm.y;
      if (std::abs(u) <= half_w && v <= below && -v <= above) out.push_back({r, c});
    }
}

std::vector<Pixel> render_line(const LineSpec& spec, PointD center, Random& rng) {
  const LinePath path(spec, center);
  const double h = spec.stroke_height;
  double gaps = 0.0;
  for (double g : spec.word_gaps) gaps += g;
  const int words = static_cast<int>(spec.word_gaps.size()) + 1;
  const double word_len = (spec.length - gaps) / words;

  std::vector<Pixel> ink;
  double s = -spec.length / 2.0;
  for (int w = 0; w < words; ++w) {
    const double end = s + word_len;
    while (true) {
      const double width = h * rng.uniform(0.55, 0.80);
      const double above = 0.5 * h * (1.0 + 0.4 * rng.uniform(-1.0, 1.0));
      const double below = 0.5 * h * (1.0 + 0.4 * rng.uniform(-1.0, 1.0));
      const double gap = h * rng.uniform(0.15, 0.30);
      const Frame f0 = path.at(s);
      const double speed = std::max(1e-9, std::hypot(f0.tangent.x, f0.tangent.y));
      const double mid = s + 0.5 * width / speed;
      if (mid > end) break;
      const Frame f = path.at(mid);
      const double norm = std::hypot(f.tangent.x, f.tangent.y);
      stamp_dash(ink, f.pos, {f.tangent.x / norm, f.tangent.y / norm}, 0.5 * width, above, below);
      s += (width + gap) / speed;
    }
    s = end;
    if (w < words - 1) s += spec.word_gaps[w];
  }
  std::sort(ink.begin(), ink.end());
  ink.erase(std::unique(ink.begin(), ink.end()), ink.end());
  return ink;
}

void validate(const PageSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw DomainError("page dimensions must be positive");
  for (const auto& l : spec.lines) {
    if (!(l.orientation >= 0.0 && l.orientation < 180.0)) throw DomainError("line orientation must be in [0, 180)");
    if (!(l.length > 0.0)) throw DomainError("line length must be positive");
    if (!(l.stroke_height > 0.0)) throw DomainError("stroke height must be positive");
    double gaps = 0.0;
    for (double g : l.word_gaps) {
      if (!(g >= 0.0)) throw DomainError("word gaps must be non-negative");
      gaps += g;
    }
    if (gaps >= l.length) throw DomainError("word gaps exceed the line length");
  }
}

const char* kind_name(LineKind k) {
  switch (k) {
    case LineKind::straight: return "straight";
    case LineKind::arc: return "arc";
    case LineKind::sine: return "sine";
  }
  return "straight";
}

LineKind parse_kind(const std::string& s) {
  if (s == "straight") return LineKind::straight;
  if (s == "arc") return LineKind::arc;
  if (s == "sine") return LineKind::sine;
  throw DomainError("unknown line kind '" + s + "'");
}

PageSpec page_from_json(const nlohmann::json& j) {
  PageSpec p;
  p.name = j.value("name", p.name);
  p.width = j.value("width", p.width);
  p.height = j.value("height", p.height);
  p.seed = j.value("seed", p.seed);
  for (const auto& lj : j.at("lines")) {
    LineSpec l;
    l.kind = parse_kind(lj.value("kind", std::string("straight")));
    l.orientation = lj.value("orientation", l.orientation);
    l.curvature = lj.value("curvature", l.curvature);
    l.length = lj.value("length", l.length);
    l.stroke_height = lj.value("stroke_height", l.stroke_height);
    if (lj.contains("word_gaps")) l.word_gaps = lj.at("word_gaps").get<std::vector<double>>();
    if (lj.contains("center")) {
      const auto c = lj.at("center").get<std::vector<double>>();
      if (c.size() != 2) throw DomainError("center must be [x, y]");
      l.center = PointD{c[0], c[1]};
    }
    p.lines.push_back(std::move(l));
  }
  return p;
}

}  // namespace

SyntheticPage generate_page(const PageSpec& spec) {
  validate(spec);
  Random rng(spec.seed);
  SyntheticPage page{BinaryImage(spec.width, spec.height), LineLabeling(spec.width, spec.height)};
  cv::Mat forbidden = cv::Mat::zeros(spec.height, spec.width, CV_8U);

  for (std::size_t k = 0; k < spec.lines.size(); ++k) {
    const LineSpec& line = spec.lines[k];
    std::vector<Pixel> ink;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      PointD center;
      if (line.center) {
        center = *line.center;
      } else {
        center = {rng.uniform(kMargin, spec.width - kMargin), rng.uniform(kMargin, spec.height - kMargin)};
      }
      ink = render_line(line, center, rng);
      placed = !ink.empty();
      for (const auto& p : ink) {
        if (p.row < kMargin || p.col < kMargin || p.row >= spec.height - kMargin || p.col >= spec.width - kMargin ||
            forbidden.at<std::uint8_t>(p.row, p.col)) {
          placed = false;
          break;
        }
      }
      if (line.center && !placed) break;
    }
    if (!placed)
      throw PlacementError("line " + std::to_string(k + 1) + " of page '" + spec.name +
                           "' could not be placed without overlap");

    cv::Mat mine = cv::Mat::zeros(spec.height, spec.width, CV_8U);
    for (const auto& p : ink) {
      page.image.set(p);
      page.truth.labels[p] = static_cast<int>(k) + 1;
      mine.at<std::uint8_t>(p.row, p.col) = 1;
    }
    const int rad = static_cast<int>(std::ceil(kClearance * line.stroke_height));
    cv::Mat grown;
    cv::dilate(mine, grown, cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(2 * rad + 1, 2 * rad + 1)));
    forbidden |= grown;
  }
  page.truth.n_lines = static_cast<int>(spec.lines.size());
  return page;
}

PageSpec random_page_spec(std::uint64_t seed, const RandomPageOptions& o) {
  Random rng(seed ^ 0x9E3779B97F4A7C15ull);
  PageSpec spec;
  spec.name = "synth_" + std::to_string(seed);
  spec.width = o.width;
  spec.height = o.height;
  spec.seed = seed;

  auto base_line = [&](LineKind kind, double orientation) {
    LineSpec l;
    l.kind = kind;
    l.orientation = orientation;
    l.length = rng.uniform(o.min_length, o.max_length);
    l.stroke_height = rng.uniform(o.min_stroke, o.max_stroke);
    const int words = rng.integer(2, 4);
    for (int w = 1; w < words; ++w) l.word_gaps.push_back(l.stroke_height * rng.uniform(0.8, 1.3));
    return l;
  };

  const double offset = rng.uniform(0.0, 180.0);
  for (int i = 0; i < o.n_straight; ++i) {
    const double theta = std::fmod(offset + 180.0 * i / std::max(1, o.n_straight), 180.0);
    spec.lines.push_back(base_line(LineKind::straight, theta));
  }
  for (int i = 0; i < o.n_sine; ++i) {
    LineSpec l = base_line(LineKind::sine, rng.uniform(0.0, 180.0));
    l.curvature = l.length * rng.uniform(0.05, 0.09);
    spec.lines.push_back(std::move(l));
  }
  for (int i = 0; i < o.n_arc; ++i) {
    LineSpec l = base_line(LineKind::arc, rng.uniform(0.0, 180.0));
    l.curvature = rng.uniform(0.5, 1.2) / l.length;
    spec.lines.push_back(std::move(l));
  }
  return spec;
}

std::vector<PageSpec> page_specs_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid page spec JSON: ") + e.what());
  }
  try {
    std::vector<PageSpec> out;
    if (j.contains("pages")) {
      for (const auto& p : j.at("pages")) out.push_back(page_from_json(p));
    } else if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      RandomPageOptions o;
      o.width = d.value("width", o.width);
      o.height = d.value("height", o.height);
      o.n_straight = d.value("straight", o.n_straight);
      o.n_sine = d.value("sine", o.n_sine);
      o.n_arc = d.value("arc", o.n_arc);
      o.min_length = d.value("min_length", o.min_length);
      o.max_length = d.value("max_length", o.max_length);
      o.min_stroke = d.value("min_stroke", o.min_stroke);
      o.max_stroke = d.value("max_stroke", o.max_stroke);
      const int count = d.value("count", 1);
      const std::uint64_t seed = d.value("seed", std::uint64_t{1});
      for (int i = 0; i < count; ++i) out.push_back(random_page_spec(seed + static_cast<std::uint64_t>(i), o));
    } else {
      out.push_back(page_from_json(j));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid page spec: ") + e.what());
  }
}

std::string page_spec_to_json(const PageSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["seed"] = spec.seed;
  j["lines"] = nlohmann::json::array();
  for (const auto& l : spec.lines) {
    nlohmann::json lj{{"kind", kind_name(l.kind)},
                      {"orientation", l.orientation},
                      {"curvature", l.curvature},
                      {"length", l.length},
                      {"stroke_height", l.stroke_height},
                      {"word_gaps", l.word_gaps}};
    if (l.center) lj["center"] = {l.center->x, l.center->y};
    j["lines"].push_back(std::move(lj));
  }
  return j.dump(2);
}

}  // namespace mocseg
