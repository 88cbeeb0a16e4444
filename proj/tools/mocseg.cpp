// Command line front end: segment, evaluate, synth, visualize.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mocseg/errors.hpp"
#include "mocseg/evaluation.hpp"
#include "mocseg/ground_truth.hpp"
#include "mocseg/pipeline.hpp"
#include "mocseg/synth.hpp"

namespace fs = std::filesystem;
using namespace mocseg;

namespace {

struct CommandResult {
  int exit_code = 0;
  std::vector<fs::path> report_paths;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mocseg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MOCSEG_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

Grid<int> blobs_to_labels(int w, int h, const std::vector<BlobLine>& blobs) {
  Grid<int> g(w, h, 0);
  for (std::size_t i = 0; i < blobs.size(); ++i)
    for (const auto& p : blobs[i].pixels) g[p] = static_cast<int>(i) + 1;
  return g;
}

void write_debug(const fs::path& dir, const std::string& stem, const BinaryImage& img, const StageArtifacts& art) {
  const int w = img.width(), h = img.height();
  save_binary_image(dir / (stem + "_debug_mask.png"), art.blob_mask.bits);

  std::vector<BlobLine> valid, invalid;
  for (std::size_t i = 0; i < art.blobs.size(); ++i) (art.valid[i] ? valid : invalid).push_back(art.blobs[i]);
  write_rgb(dir / (stem + "_debug_valid.png"), render_labels(blobs_to_labels(w, h, valid)));
  write_rgb(dir / (stem + "_debug_invalid.png"), render_labels(blobs_to_labels(w, h, invalid)));
  write_rgb(dir / (stem + "_debug_segments.png"), render_labels(blobs_to_labels(w, h, art.children)));
  write_rgb(dir / (stem + "_debug_ligatures.png"), render_labels(blobs_to_labels(w, h, art.removed)));
  write_rgb(dir / (stem + "_debug_merged.png"), render_labels(blobs_to_labels(w, h, art.merged)));
  std::ofstream csv(dir / (stem + "_debug_graph.csv"));
  if (!csv) throw IoError("cannot write " + (dir / (stem + "_debug_graph.csv")).string());
  write_graph_csv(csv, art.graph);
}

std::vector<fs::path> segment_one(const fs::path& input, const fs::path& out_dir, const PipelineParams& params,
                                  bool debug, Polarity polarity) {
  const BinaryImage img = load_binary_image(input, polarity);
  const std::string stem = input.stem().string();
  StageArtifacts art;
  const Segmentation seg = segment_page(img, params, debug ? &art : nullptr);
  spdlog::info("{}: {} lines", input.string(), seg.labeling.n_lines);

  const fs::path labels = out_dir / (stem + "_labels.png");
  const fs::path xml = out_dir / (stem + ".xml");
  const fs::path overlay = out_dir / (stem + "_overlay.png");
  write_raw_labels(labels, seg.labeling);
  write_page_xml(xml, seg.polygons, {input.filename().string(), img.width(), img.height()});
  write_rgb(overlay, render_overlay(img, seg.labeling.labels, &seg.polygons));
  if (debug) write_debug(out_dir, stem, img, art);
  return {labels, xml, overlay};
}

CommandResult run_segment(const std::vector<std::string>& inputs, const fs::path& out_dir,
                          const std::optional<fs::path>& config, bool baseline, bool debug, int jobs,
                          bool light_fg) {
  PipelineParams params = config ? load_params(*config) : PipelineParams{};
  if (baseline) params.bank.baseline_mode = true;
  params.validate();
  ensure_dir(out_dir);
  const Polarity polarity = light_fg ? Polarity::light_is_fg : Polarity::dark_is_fg;

  CommandResult result;
  std::vector<std::vector<fs::path>> produced(inputs.size());
  std::vector<std::string> errors(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < inputs.size();) {
      try {
        produced[i] = segment_one(inputs[i], out_dir, params, debug, polarity);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, inputs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "mocseg: error: " << errors[i] << '\n';
      result.exit_code = 1;
    }
    result.report_paths.insert(result.report_paths.end(), produced[i].begin(), produced[i].end());
  }
  return result;
}

// Ground truth for a stem: PAGE XML when present, else the raw label PNG.
std::optional<LineMasks> load_masks(const fs::path& dir, const std::string& stem, const BinaryImage& img) {
  const fs::path xml = dir / (stem + ".xml");
  if (fs::exists(xml)) return masks_from_polygons(read_page_xml(xml), img);
  const fs::path raw = dir / (stem + "_labels.png");
  if (fs::exists(raw)) {
    const LineLabeling lab = read_raw_labels(raw);
    if (lab.width() != img.width() || lab.height() != img.height())
      throw FormatError(raw.string() + ": size differs from the page image");
    return masks_from_polygons(polygons_from_labels(lab), img);
  }
  return std::nullopt;
}

std::vector<std::string> gt_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_labels.png";
    if (entry.path().extension() == ".xml") {
      stems.push_back(entry.path().stem().string());
    } else if (name.size() > suffix.size() && name.ends_with(suffix)) {
      stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(stems.begin(), stems.end());
  stems.erase(std::unique(stems.begin(), stems.end()), stems.end());
  return stems;
}

CommandResult run_evaluate(const fs::path& gt_dir, const fs::path& pred_dir, const fs::path& img_dir,
                           const std::optional<fs::path>& csv_path, double threshold, bool light_fg) {
  CommandResult result;
  const auto stems = gt_stems(gt_dir);
  if (stems.empty()) throw IoError("no ground truth found in " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir.string());

  const fs::path out = csv_path ? *csv_path : pred_dir / "evaluation.csv";
  std::ostringstream csv;
  csv << "page,pixel_iu,line_iu,tp,fp,fn,cl,ml,el\n";
  std::vector<PageScores> pages;
  for (const auto& stem : stems) {
    const fs::path image = img_dir / (stem + ".png");
    const BinaryImage img = load_binary_image(image, light_fg ? Polarity::light_is_fg : Polarity::dark_is_fg);
    const auto gt = load_masks(gt_dir, stem, img);
    auto pred = load_masks(pred_dir, stem, img);
    if (!pred) {
      spdlog::warn("{}: no prediction, scored as empty", stem);
      pred = LineMasks{img.width(), img.height(), {}};
    }
    const PageScores s = score_page(*gt, *pred, threshold);
    pages.push_back(s);
    csv << stem << ',' << s.pixel_iu << ',' << s.line_iu << ',' << s.tp << ',' << s.fp << ',' << s.fn << ','
        << s.cl << ',' << s.ml << ',' << s.el << '\n';
  }
  const DatasetMeans means = dataset_means(pages);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write " + out.string());
  f << csv.str();
  result.report_paths.push_back(out);
  std::cout << "pages=" << pages.size() << " mean_pixel_iu=" << means.pixel_iu << " mean_line_iu=" << means.line_iu
            << '\n';
  return result;
}

CommandResult run_synth(const fs::path& spec_path, const fs::path& out_dir, bool diva) {
  std::ifstream f(spec_path);
  if (!f) throw IoError("cannot read " + spec_path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  const auto specs = page_specs_from_json(ss.str());
  ensure_dir(out_dir);
  CommandResult result;
  for (const auto& spec : specs) {
    const SyntheticPage page = generate_page(spec);
    const PolygonSet polys = polygons_from_labels(page.truth);
    const fs::path png = out_dir / (spec.name + ".png");
    const fs::path labels = out_dir / (spec.name + "_labels.png");
    const fs::path xml = out_dir / (spec.name + ".xml");
    save_binary_image(png, page.image);
    write_raw_labels(labels, page.truth);
    write_page_xml(xml, polys, {png.filename().string(), spec.width, spec.height});
    result.report_paths.insert(result.report_paths.end(), {png, labels, xml});
    if (diva) {
      const fs::path d = out_dir / (spec.name + "_diva.png");
      write_diva(d, diva_encode(page.image, polys));
      result.report_paths.push_back(d);
    }
    spdlog::info("{}: {} lines", spec.name, page.truth.n_lines);
  }
  return result;
}

CommandResult run_visualize(const fs::path& input, const fs::path& out, const std::optional<fs::path>& image,
                            bool light_fg) {
  const Polarity polarity = light_fg ? Polarity::light_is_fg : Polarity::dark_is_fg;
  std::optional<BinaryImage> img;
  if (image) img = load_binary_image(*image, polarity);

  Grid<Rgb> canvas;
  if (input.extension() == ".xml") {
    PageInfo info;
    const PolygonSet polys = read_page_xml(input, &info);
    if (!img) {
      if (info.width < 1 || info.height < 1) throw FormatError(input.string() + ": page size unknown, pass --img");
      img = BinaryImage(info.width, info.height);
    }
    canvas = render_overlay(*img, {}, &polys);
  } else {
    const Grid<Rgb> rgb = read_rgb(input);
    bool gray = true;
    for (const auto& v : rgb.values()) gray = gray && v[0] == v[1] && v[1] == v[2];
    if (gray) {
      const LineLabeling lab = read_raw_labels(input);
      canvas = img ? render_overlay(*img, lab.labels, nullptr) : render_labels(lab.labels);
    } else {
      const DivaMasks m = diva_decode({rgb});
      // Text pixels in palette color 1, in-polygon background in a light tint.
      canvas = Grid<Rgb>(rgb.width(), rgb.height(), palette_color(0));
      for (int r = 0; r < rgb.height(); ++r)
        for (int c = 0; c < rgb.width(); ++c) {
          if (m.text.at(r, c)) canvas(r, c) = palette_color(1);
          else if (m.inside.at(r, c)) canvas(r, c) = {255, 220, 220};
        }
    }
  }
  write_rgb(out, canvas);
  return {0, {out}};
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Text-line segmentation of binarized handwritten pages"};
  app.require_subcommand(1);

  std::vector<std::string> seg_inputs;
  std::string seg_out;
  std::string seg_config;
  bool seg_baseline = false, seg_debug = false;
  int seg_jobs = 1;
  bool light_fg = false;
  auto* seg = app.add_subcommand("segment", "Segment page images into text lines");
  seg->add_option("inputs", seg_inputs, "Binarized page images")->required()->check(CLI::ExistingFile);
  seg->add_option("--out-dir", seg_out, "Output directory")->required();
  seg->add_option("--config", seg_config, "Parameter file (key = value)")->check(CLI::ExistingFile);
  seg->add_flag("--baseline", seg_baseline, "Single orientation (0 deg) filter bank");
  seg->add_flag("--debug", seg_debug, "Write per-stage images and the merge graph");
  seg->add_option("--jobs", seg_jobs, "Pages processed in parallel")->check(CLI::PositiveNumber);
  seg->add_flag("--light-fg", light_fg, "Treat light pixels as ink");

  std::string ev_gt, ev_pred, ev_img, ev_csv;
  double ev_threshold = 0.75;
  auto* ev = app.add_subcommand("evaluate", "Score predictions against ground truth");
  ev->add_option("--gt", ev_gt, "Ground truth directory")->required();
  ev->add_option("--pred", ev_pred, "Prediction directory")->required();
  ev->add_option("--img", ev_img, "Page image directory")->required();
  ev->add_option("--csv", ev_csv, "Report path (default <pred>/evaluation.csv)");
  ev->add_option("--threshold", ev_threshold, "Line precision/recall threshold");
  ev->add_flag("--light-fg", light_fg, "Treat light pixels as ink");

  std::string sy_spec, sy_out;
  bool sy_diva = false;
  auto* sy = app.add_subcommand("synth", "Generate synthetic pages with ground truth");
  sy->add_option("--spec", sy_spec, "Page spec JSON")->required();
  sy->add_option("--out-dir", sy_out, "Output directory")->required();
  sy->add_flag("--diva", sy_diva, "Also write DIVA pixel labels");

  std::string vi_in, vi_out, vi_img;
  auto* vi = app.add_subcommand("visualize", "Render ground truth or predictions in color");
  vi->add_option("input", vi_in, "Raw label PNG, DIVA PNG or PAGE XML")->required();
  vi->add_option("--out", vi_out, "Output PNG")->required();
  vi->add_option("--img", vi_img, "Page image for ink");
  vi->add_flag("--light-fg", light_fg, "Treat light pixels as ink");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "mocseg: error: " << e.what() << '\n';
      return e.get_exit_code();
    }
    return app.exit(e);
  }

  try {
    CommandResult r;
    if (*seg) {
      r = run_segment(seg_inputs, seg_out, seg_config.empty() ? std::nullopt : std::optional<fs::path>(seg_config),
                      seg_baseline, seg_debug, seg_jobs, light_fg);
    } else if (*ev) {
      r = run_evaluate(ev_gt, ev_pred, ev_img, ev_csv.empty() ? std::nullopt : std::optional<fs::path>(ev_csv),
                       ev_threshold, light_fg);
    } else if (*sy) {
      r = run_synth(sy_spec, sy_out, sy_diva);
    } else if (*vi) {
      r = run_visualize(vi_in, vi_out, vi_img.empty() ? std::nullopt : std::optional<fs::path>(vi_img), light_fg);
    }
    for (const auto& p : r.report_paths) spdlog::debug("wrote {}", p.string());
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "mocseg: error: " << e.what() << '\n';
    return 1;
  }
}
