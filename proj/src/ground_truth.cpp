#include "mocseg/ground_truth.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include <boost/property_tree/detail/rapidxml.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace rx = boost::property_tree::detail::rapidxml;

void LineLabeling::validate() const {
  if (n_lines < 0) throw DomainError("negative line count");
  std::vector<char> seen(static_cast<std::size_t>(n_lines) + 1, 0);
  for (int v : labels.values()) {
    if (v < 0 || v > n_lines) throw DomainError("label " + std::to_string(v) + " outside [0, n_lines]");
    seen[v] = 1;
  }
  for (int k = 1; k <= n_lines; ++k)
    if (!seen[k]) throw DomainError("line " + std::to_string(k) + " has no pixels");
}

LineLabeling compact_labels(const Grid<int>& labels) {
  std::map<int, int> remap;
  for (int v : labels.values())
    if (v > 0) remap.emplace(v, 0);
  int next = 0;
  for (auto& [from, to] : remap) to = ++next;
  LineLabeling out(labels.width(), labels.height());
  out.n_lines = next;
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c) {
      const int v = labels(r, c);
      if (v > 0) out.labels(r, c) = remap.at(v);
    }
  return out;
}

void write_raw_labels(const std::filesystem::path& path, const LineLabeling& labeling) {
  if (labeling.n_lines > 65535)
    throw CapacityError("raw label files hold at most 65535 lines, got " + std::to_string(labeling.n_lines));
  labeling.validate();
  Grid<std::uint16_t> out(labeling.width(), labeling.height(), 0);
  for (int r = 0; r < labeling.height(); ++r)
    for (int c = 0; c < labeling.width(); ++c) out(r, c) = static_cast<std::uint16_t>(labeling.labels(r, c));
  write_gray16(path, out);
}

LineLabeling read_raw_labels(const std::filesystem::path& path) {
  const Grid<std::uint16_t> raw = read_gray16(path);
  LineLabeling out(raw.width(), raw.height());
  int top = 0;
  for (int r = 0; r < raw.height(); ++r)
    for (int c = 0; c < raw.width(); ++c) {
      out.labels(r, c) = raw(r, c);
      top = std::max<int>(top, raw(r, c));
    }
  out.n_lines = top;
  return out;
}

// --- DIVA ---------------------------------------------------------------------

DivaLabeling diva_encode(const BinaryImage& img, const PolygonSet& polys) {
  Grid<std::uint8_t> inside(img.width(), img.height(), 0);
  for (const auto& poly : polys.polygons) {
    const auto mask = rasterize_polygon(poly, img.width(), img.height());
    for (std::size_t i = 0; i < mask.size(); ++i) inside.values()[i] |= mask.values()[i];
  }
  DivaLabeling out{Grid<Rgb>(img.width(), img.height(), kDivaOutside)};
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      if (inside(r, c)) out.rgb(r, c) = img.at(r, c) ? kDivaText : kDivaBoundary;
  return out;
}

DivaMasks diva_decode(const DivaLabeling& diva) {
  const int w = diva.rgb.width(), h = diva.rgb.height();
  DivaMasks m{BinaryImage(w, h), BinaryImage(w, h)};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const Rgb& v = diva.rgb(r, c);
      if (v == kDivaOutside) continue;
      if (v == kDivaText) {
        m.inside.set(r, c);
        m.text.set(r, c);
      } else if (v == kDivaBoundary) {
        m.inside.set(r, c);
      } else {
        throw FormatError("DIVA color (" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," +
                          std::to_string(v[2]) + ") at row " + std::to_string(r) + ", column " +
                          std::to_string(c) + " is not one of the three codes");
      }
    }
  return m;
}

void write_diva(const std::filesystem::path& path, const DivaLabeling& diva) { write_rgb(path, diva.rgb); }

DivaLabeling read_diva(const std::filesystem::path& path) { return {read_rgb(path)}; }

// --- PAGE XML -----------------------------------------------------------------

namespace {

constexpr const char* kPageNamespace = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15";

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string_view local_name(const rx::xml_node<char>* node) {
  std::string_view name(node->name(), node->name_size());
  const auto colon = name.rfind(':');
  return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

const rx::xml_attribute<char>* find_attr(const rx::xml_node<char>* node, std::string_view name) {
  for (auto* a = node->first_attribute(); a; a = a->next_attribute())
    if (std::string_view(a->name(), a->name_size()) == name) return a;
  return nullptr;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError("invalid integer '" + std::string(s) + "' in " + std::string(what));
  return v;
}

Polygon parse_points(std::string_view s) {
  Polygon poly;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    const std::string_view pair = s.substr(i, j - i);
    const auto comma = pair.find(',');
    if (comma == std::string_view::npos) throw FormatError("point '" + std::string(pair) + "' lacks a comma");
    poly.push_back({parse_int(pair.substr(0, comma), "Coords points"),
                    parse_int(pair.substr(comma + 1), "Coords points")});
    i = j;
  }
  return poly;
}

Polygon read_coords(const rx::xml_node<char>* coords) {
  if (const auto* pts = find_attr(coords, "points"))
    return parse_points(std::string_view(pts->value(), pts->value_size()));
  Polygon poly;
  for (auto* child = coords->first_node(); child; child = child->next_sibling()) {
    if (local_name(child) != "Point") continue;
    const auto* x = find_attr(child, "x");
    const auto* y = find_attr(child, "y");
    if (!x || !y) throw FormatError("Point element without x or y attribute");
    poly.push_back({parse_int(std::string_view(x->value(), x->value_size()), "Point@x"),
                    parse_int(std::string_view(y->value(), y->value_size()), "Point@y")});
  }
  return poly;
}

void collect_lines(const rx::xml_node<char>* node, PolygonSet& out, PageInfo* info) {
  for (auto* child = node->first_node(); child; child = child->next_sibling()) {
    if (child->type() != rx::node_element) continue;
    const auto name = local_name(child);
    if (name == "Page" && info) {
      if (const auto* a = find_attr(child, "imageFilename")) info->image_filename.assign(a->value(), a->value_size());
      if (const auto* a = find_attr(child, "imageWidth"))
        info->width = static_cast<int>(parse_int(std::string_view(a->value(), a->value_size()), "imageWidth"));
      if (const auto* a = find_attr(child, "imageHeight"))
        info->height = static_cast<int>(parse_int(std::string_view(a->value(), a->value_size()), "imageHeight"));
    }
    if (name == "TextLine") {
      const rx::xml_node<char>* coords = nullptr;
      for (auto* c = child->first_node(); c && !coords; c = c->next_sibling())
        if (c->type() == rx::node_element && local_name(c) == "Coords") coords = c;
      if (!coords) throw FormatError("TextLine without Coords");
      out.polygons.push_back(read_coords(coords));
      continue;  // nested TextLines are not meaningful
    }
    collect_lines(child, out, info);
  }
}

}  // namespace

std::string format_points(const Polygon& poly) {
  std::string s;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(poly[i].x);
    s += ',';
    s += std::to_string(poly[i].y);
  }
  return s;
}

void write_page_xml(std::ostream& out, const PolygonSet& polys, const PageInfo& info) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<PcGts xmlns=\"" << kPageNamespace << "\">\n";
  out << "  <Metadata>\n    <Creator>mocseg</Creator>\n  </Metadata>\n";
  out << "  <Page imageFilename=\"" << xml_escape(info.image_filename) << "\" imageWidth=\"" << info.width
      << "\" imageHeight=\"" << info.height << "\">\n";
  out << "    <TextRegion id=\"r1\">\n";
  out << "      <Coords points=\"0,0 " << info.width << ",0 " << info.width << ',' << info.height << " 0,"
      << info.height << "\"/>\n";
  for (std::size_t i = 0; i < polys.polygons.size(); ++i) {
    out << "      <TextLine id=\"l" << (i + 1) << "\">\n";
    out << "        <Coords points=\"" << format_points(polys.polygons[i]) << "\"/>\n";
    out << "      </TextLine>\n";
  }
  out << "    </TextRegion>\n  </Page>\n</PcGts>\n";
}

void write_page_xml(const std::filesystem::path& path, const PolygonSet& polys, const PageInfo& info) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  write_page_xml(f, polys, info);
  if (!f) throw IoError("cannot write " + path.string());
}

PolygonSet read_page_xml_string(const std::string& text, PageInfo* info) {
  std::vector<char> buf(text.begin(), text.end());
  buf.push_back('\0');
  rx::xml_document<char> doc;
  try {
    doc.parse<rx::parse_default>(buf.data());
  } catch (const rx::parse_error& e) {
    // The parser writes terminators into buf, so positions are read from text.
    const auto offset = static_cast<std::size_t>(e.where<char>() - buf.data());
    int line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(std::string("malformed XML: ") + e.what(), line, column);
  }
  const auto* root = doc.first_node();
  while (root && root->type() != rx::node_element) root = root->next_sibling();
  if (!root || local_name(root) != "PcGts") throw FormatError("document root is not PcGts");
  PolygonSet out;
  collect_lines(root, out, info);
  return out;
}

PolygonSet read_page_xml(const std::filesystem::path& path, PageInfo* info) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_page_xml_string(ss.str(), info);
}

// --- visualization ------------------------------------------------------------

Rgb palette_color(int id) {
  static constexpr Rgb kPalette[12] = {
      {230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {245, 130, 48}, {145, 30, 180}, {70, 200, 200},
      {240, 50, 230}, {150, 150, 20}, {0, 128, 128},  {170, 110, 40}, {128, 0, 0},    {0, 0, 128}};
  if (id <= 0) return {255, 255, 255};
  return kPalette[(id - 1) % 12];
}

Grid<Rgb> render_labels(const Grid<int>& labels) {
  Grid<Rgb> out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) out.values()[i] = palette_color(labels.values()[i]);
  return out;
}

Grid<Rgb> render_overlay(const BinaryImage& img, const Grid<int>& labels, const PolygonSet* polys) {
  const int w = img.width(), h = img.height();
  cv::Mat canvas(h, w, CV_8UC3, cv::Scalar(255, 255, 255));
  auto put = [&](int r, int c, Rgb v) { canvas.at<cv::Vec3b>(r, c) = cv::Vec3b(v[0], v[1], v[2]); };

  std::vector<Grid<std::uint8_t>> masks;
  if (polys)
    for (const auto& p : polys->polygons) masks.push_back(rasterize_polygon(p, w, h));

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!img.at(r, c)) continue;
      int id = (!labels.empty()) ? labels(r, c) : 0;
      if (id == 0)
        for (std::size_t k = 0; k < masks.size(); ++k)
          if (masks[k](r, c)) {
            id = static_cast<int>(k) + 1;
            break;
          }
      put(r, c, id > 0 ? palette_color(id) : Rgb{0, 0, 0});
    }
  if (polys) {
    for (std::size_t k = 0; k < polys->polygons.size(); ++k) {
      const auto& poly = polys->polygons[k];
      if (poly.size() < 2) continue;
      std::vector<cv::Point> pts;
      for (const auto& v : poly) pts.emplace_back(static_cast<int>(v.x), static_cast<int>(v.y));
      const Rgb col = palette_color(static_cast<int>(k) + 1);
      cv::polylines(canvas, pts, true, cv::Scalar(col[0], col[1], col[2]), 1, cv::LINE_8);
    }
  }
  Grid<Rgb> out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const auto& v = canvas.at<cv::Vec3b>(r, c);
      out(r, c) = {v[0], v[1], v[2]};
    }
  return out;
}

}  // namespace mocseg
