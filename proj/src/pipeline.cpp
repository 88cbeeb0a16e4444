#include "mocseg/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mocseg/errors.hpp"

namespace mocseg {

void PipelineParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("parameter out of range: ") + what);
  };
  require(bank.orientation_step_deg > 0.0 && bank.orientation_step_deg <= 180.0, "orientation_step_deg");
  require(bank.n_scales >= 1, "n_scales");
  require(bank.aspect >= 1.0, "aspect");
  require(bank.niblack_window == 0 || (bank.niblack_window >= 3 && bank.niblack_window % 2 == 1),
          "niblack_window");
  require(bank.noise_floor >= 0.0 && bank.noise_floor < 1.0, "noise_floor");
  require(ligature.gamma > 0.0, "gamma");
  require(ligature.deviation_threshold_deg >= 0.0 && ligature.deviation_threshold_deg <= 90.0,
          "deviation_threshold_deg");
  require(merge.gamma_merge > 0.0, "gamma_merge");
  require(merge.anchor_factor > 0.0, "anchor_factor");
  require(merge.cap_factor > 0.0, "cap_factor");
  require(assign.knn_k >= 0, "knn_k");
  require(assign.discard_percentile >= 0.0 && assign.discard_percentile <= 100.0, "discard_percentile");
  require(assign.alpha >= 0.0, "alpha");
  require(knots >= 1, "knots");
  require(validity_factor > 0.0, "validity_factor");
  require(radius_factor > 0.0, "radius_factor");
}

Segmentation segment_page(const BinaryImage& img, const PipelineParams& params, StageArtifacts* artifacts) {
  params.validate();
  Segmentation out{LineLabeling(img.width(), img.height()), {}};
  const auto components = connected_components(img);
  if (components.empty()) return out;

  // Enhancement and binarization.
  const HeightStats stats = component_height_stats(components);
  const FilterBank bank = build_bank(stats, params.bank);
  const ResponseField field = enhance(img, bank);
  const double max_scale = bank.max_scale();
  const int window = params.bank.niblack_window > 0 ? params.bank.niblack_window : default_niblack_window(max_scale);
  BlobMask mask = niblack_binarize(field, window, params.bank.niblack_k, params.bank.noise_floor);

  // Validity check, decomposition and false ligature removal.
  std::vector<BlobLine> blobs = extract_blob_lines(mask);
  const LigatureContext context =
      make_ligature_context(blobs, img.width(), img.height(), bank.orientation_step, params.radius_factor);
  std::vector<BlobLine> kept, children, removed;
  std::vector<char> valid(blobs.size(), 1);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    if (b.pixels.size() >= 2) {
      try {
        const Alignment a = principal_orientation_and_align(b.pixels);
        valid[i] = fit_and_classify(a.aligned, max_scale, params.knots, params.validity_factor).second ==
                   Validity::valid;
      } catch (const DomainError&) {
        valid[i] = 1;
      }
    }
    if (valid[i]) {
      kept.push_back(b);
      continue;
    }
    const auto pieces = skeletonize_and_decompose(b);
    const auto survivors = remove_false_ligatures(pieces, field, context, params.ligature);
    children.insert(children.end(), pieces.begin(), pieces.end());
    for (const auto& piece : pieces) {
      const bool survived = std::any_of(survivors.begin(), survivors.end(),
                                        [&](const BlobLine& s) { return s.skeleton == piece.skeleton; });
      if (!survived) removed.push_back(piece);
    }
    kept.insert(kept.end(), survivors.begin(), survivors.end());
  }
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<int>(i) + 1;

  // Merging broken blob lines.
  std::vector<BlobLine> merged;
  MergeGraph graph;
  if (!kept.empty()) {
    graph = build_merge_graph(kept, img, max_scale, params.merge);
    merged = mst_merge(graph);
  }

  // Component labeling.
  out.labeling = assign_components(components, merged, img, params.assign);
  out.polygons = polygons_from_labels(out.labeling);

  if (artifacts) {
    artifacts->stats = stats;
    artifacts->scales = bank.scales;
    artifacts->blob_mask = std::move(mask);
    artifacts->blobs = std::move(blobs);
    artifacts->valid = std::move(valid);
    artifacts->children = std::move(children);
    artifacts->removed = std::move(removed);
    artifacts->kept = std::move(kept);
    artifacts->graph = std::move(graph);
    artifacts->merged = std::move(merged);
  }
  return out;
}

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw FormatError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw FormatError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d)) throw FormatError("config key '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

using Setter = std::function<void(PipelineParams&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"orientation_step_deg", [](auto& p, auto& k, auto& v) { p.bank.orientation_step_deg = parse_double(k, v); }},
      {"n_scales", [](auto& p, auto& k, auto& v) { p.bank.n_scales = parse_int(k, v); }},
      {"aspect", [](auto& p, auto& k, auto& v) { p.bank.aspect = parse_double(k, v); }},
      {"niblack_k", [](auto& p, auto& k, auto& v) { p.bank.niblack_k = parse_double(k, v); }},
      {"niblack_window", [](auto& p, auto& k, auto& v) { p.bank.niblack_window = parse_int(k, v); }},
      {"noise_floor", [](auto& p, auto& k, auto& v) { p.bank.noise_floor = parse_double(k, v); }},
      {"baseline_mode", [](auto& p, auto& k, auto& v) { p.bank.baseline_mode = parse_bool(k, v); }},
      {"gamma", [](auto& p, auto& k, auto& v) { p.ligature.gamma = parse_double(k, v); }},
      {"deviation_threshold_deg",
       [](auto& p, auto& k, auto& v) { p.ligature.deviation_threshold_deg = parse_double(k, v); }},
      {"literal_ligature", [](auto& p, auto& k, auto& v) { p.ligature.literal_ligature = parse_bool(k, v); }},
      {"gamma_merge", [](auto& p, auto& k, auto& v) { p.merge.gamma_merge = parse_double(k, v); }},
      {"anchor_factor", [](auto& p, auto& k, auto& v) { p.merge.anchor_factor = parse_double(k, v); }},
      {"cap_factor", [](auto& p, auto& k, auto& v) { p.merge.cap_factor = parse_double(k, v); }},
      {"literal_e2", [](auto& p, auto& k, auto& v) { p.merge.literal_e2 = parse_bool(k, v); }},
      {"beta", [](auto& p, auto& k, auto& v) { p.assign.beta = parse_double(k, v); }},
      {"knn_k", [](auto& p, auto& k, auto& v) { p.assign.knn_k = parse_int(k, v); }},
      {"discard_percentile", [](auto& p, auto& k, auto& v) { p.assign.discard_percentile = parse_double(k, v); }},
      {"alpha", [](auto& p, auto& k, auto& v) { p.assign.alpha = parse_double(k, v); }},
      {"knots", [](auto& p, auto& k, auto& v) { p.knots = parse_int(k, v); }},
      {"validity_factor", [](auto& p, auto& k, auto& v) { p.validity_factor = parse_double(k, v); }},
      {"radius_factor", [](auto& p, auto& k, auto& v) { p.radius_factor = parse_double(k, v); }},
  };
  return table;
}

void apply(PipelineParams& p, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw FormatError("unknown config key '" + key + "'");
  it->second(p, key, value);
}

}  // namespace

PipelineParams parse_params(const std::string& text, PipelineParams base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("malformed config: " + e.message(), static_cast<int>(e.line()), 1);
  }
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      apply(base, key, node.data());
    } else {
      for (const auto& [sub, leaf] : node) apply(base, sub, leaf.data());
    }
  }
  base.validate();
  return base;
}

PipelineParams load_params(const std::filesystem::path& path, PipelineParams base) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_params(ss.str(), base);
}

}  // namespace mocseg
