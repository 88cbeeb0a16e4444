#include "mocseg/imaging.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

BinaryImage::BinaryImage(int width, int height) {
  if (width < 1 || height < 1) {
    throw FormatError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  bits_ = Grid<std::uint8_t>(width, height, 0);
}

std::size_t BinaryImage::foreground_count() const {
  std::size_t n = 0;
  for (auto v : bits_.values()) n += v != 0;
  return n;
}

std::vector<Pixel> BinaryImage::foreground_pixels() const {
  std::vector<Pixel> out;
  for (int r = 0; r < height(); ++r)
    for (int c = 0; c < width(); ++c)
      if (at(r, c)) out.push_back({r, c});
  return out;
}

BinaryImage binarize_gray(const Grid<std::uint8_t>& gray, Polarity polarity) {
  BinaryImage img(gray.width(), gray.height());
  for (int r = 0; r < gray.height(); ++r) {
    for (int c = 0; c < gray.width(); ++c) {
      const bool dark = gray(r, c) < 128;
      img.set(r, c, polarity == Polarity::dark_is_fg ? dark : !dark);
    }
  }
  return img;
}

namespace {

// Distinguishes "decodes to an empty raster" from "not an image at all" for
// the two formats we accept, since the codec reports both as an empty Mat.
bool header_declares_zero_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic(2, '\0');
  if (!in.read(magic.data(), 2)) return false;
  if (magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '6') {
    long w = -1, h = -1;
    std::string tok;
    auto next = [&]() -> bool {
      tok.clear();
      char ch;
      while (in.get(ch)) {
        if (ch == '#') {
          std::string dummy;
          std::getline(in, dummy);
          continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
          if (!tok.empty()) return true;
          continue;
        }
        tok.push_back(ch);
      }
      return !tok.empty();
    };
    if (next()) w = std::strtol(tok.c_str(), nullptr, 10);
    if (next()) h = std::strtol(tok.c_str(), nullptr, 10);
    return w == 0 || h == 0;
  }
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
    // PNG signature (8) + IHDR length (4) + "IHDR" (4) + width (4) + height (4)
    unsigned char buf[22];
    if (!in.read(reinterpret_cast<char*>(buf), 22)) return false;
    auto be32 = [&](int off) {
      return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
             (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]};
    };
    return be32(14) == 0 || be32(18) == 0;
  }
  return false;
}

cv::Mat read_mat(const std::filesystem::path& path, int flags) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot read " + path.string() + ": no such file");
  }
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) {
    if (header_declares_zero_size(path)) {
      throw FormatError("zero-dimension image: " + path.string());
    }
    throw IoError("cannot decode " + path.string() + " as a raster image");
  }
  return m;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace

BinaryImage load_binary_image(const std::filesystem::path& path, Polarity polarity) {
  return binarize_gray(read_gray8(path), polarity);
}

void save_binary_image(const std::filesystem::path& path, const BinaryImage& img) {
  Grid<std::uint8_t> gray(img.width(), img.height(), 255);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      if (img.at(r, c)) gray(r, c) = 0;
  write_gray8(path, gray);
}

Grid<std::uint8_t> read_gray8(const std::filesystem::path& path) {
  cv::Mat m = read_mat(path, cv::IMREAD_GRAYSCALE);
  Grid<std::uint8_t> out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    std::copy(row, row + m.cols, &out(r, 0));
  }
  return out;
}

Grid<std::uint16_t> read_gray16(const std::filesystem::path& path) {
  cv::Mat m = read_mat(path, cv::IMREAD_UNCHANGED);
  if (m.channels() != 1) throw FormatError(path.string() + ": expected a single-channel image");
  if (m.depth() == CV_8U) m.convertTo(m, CV_16U);
  if (m.depth() != CV_16U) throw FormatError(path.string() + ": expected 8- or 16-bit samples");
  Grid<std::uint16_t> out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint16_t>(r);
    std::copy(row, row + m.cols, &out(r, 0));
  }
  return out;
}

Grid<std::array<std::uint8_t, 3>> read_rgb(const std::filesystem::path& path) {
  cv::Mat m = read_mat(path, cv::IMREAD_COLOR);
  Grid<std::array<std::uint8_t, 3>> out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<cv::Vec3b>(r);
    for (int c = 0; c < m.cols; ++c) out(r, c) = {row[c][2], row[c][1], row[c][0]};
  }
  return out;
}

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& img) {
  cv::Mat m(img.height(), img.width(), CV_8UC1);
  for (int r = 0; r < img.height(); ++r) std::copy(&img(r, 0), &img(r, 0) + img.width(), m.ptr<std::uint8_t>(r));
  write_mat(path, m);
}

void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& img) {
  cv::Mat m(img.height(), img.width(), CV_16UC1);
  for (int r = 0; r < img.height(); ++r)
    std::copy(&img(r, 0), &img(r, 0) + img.width(), m.ptr<std::uint16_t>(r));
  write_mat(path, m);
}

void write_rgb(const std::filesystem::path& path, const Grid<std::array<std::uint8_t, 3>>& img) {
  cv::Mat m(img.height(), img.width(), CV_8UC3);
  for (int r = 0; r < img.height(); ++r) {
    auto* row = m.ptr<cv::Vec3b>(r);
    for (int c = 0; c < img.width(); ++c) {
      const auto& px = img(r, c);
      row[c] = cv::Vec3b(px[2], px[1], px[0]);
    }
  }
  write_mat(path, m);
}

Grid<int> label_components(const Grid<std::uint8_t>& bits, int* count) {
  const int w = bits.width();
  const int h = bits.height();
  Grid<int> labels(w, h, 0);
  std::vector<Pixel> stack;
  int next = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!bits(r, c) || labels(r, c)) continue;
      ++next;
      labels(r, c) = next;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = p.row + dr;
            const int cc = p.col + dc;
            if (!bits.contains(rr, cc) || !bits(rr, cc) || labels(rr, cc)) continue;
            labels(rr, cc) = next;
            stack.push_back({rr, cc});
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

std::vector<ConnectedComponent> connected_components(const BinaryImage& img) {
  if (img.width() == 0) return {};
  int n = 0;
  const Grid<int> labels = label_components(img.bits(), &n);
  std::vector<ConnectedComponent> comps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    comps[i].id = i + 1;
    comps[i].bbox = {img.height(), img.width(), -1, -1};
  }
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const int l = labels(r, c);
      if (!l) continue;
      auto& cc = comps[l - 1];
      cc.pixels.push_back({r, c});
      cc.bbox.top = std::min(cc.bbox.top, r);
      cc.bbox.bottom = std::max(cc.bbox.bottom, r);
      cc.bbox.left = std::min(cc.bbox.left, c);
      cc.bbox.right = std::max(cc.bbox.right, c);
    }
  }
  for (auto& cc : comps) {
    double sr = 0.0, sc = 0.0;
    for (const auto& p : cc.pixels) {
      sr += p.row;
      sc += p.col;
    }
    const double n_px = static_cast<double>(cc.pixels.size());
    cc.centroid = {sc / n_px, sr / n_px};
    cc.height = cc.bbox.height();
  }
  return comps;
}

HeightStats component_height_stats(std::span<const ConnectedComponent> components) {
  if (components.empty()) throw DomainError("height statistics need at least one component");
  // Integer moments keep the result exactly independent of component order.
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (const auto& c : components) {
    sum += c.height;
    sum_sq += std::int64_t{c.height} * c.height;
  }
  const auto n = static_cast<std::int64_t>(components.size());
  const double nd = static_cast<double>(n);
  const double var = static_cast<double>(n * sum_sq - sum * sum) / (nd * nd);
  return {static_cast<double>(sum) / nd, std::sqrt(var)};
}

std::pair<double, double> scale_range(const HeightStats& stats) {
  return {stats.mu / 2.0, (stats.mu + stats.sigma / 2.0) / 2.0};
}

}  // namespace mocseg
