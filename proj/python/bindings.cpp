#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mocseg/energy.hpp"
#include "mocseg/errors.hpp"
#include "mocseg/evaluation.hpp"
#include "mocseg/filter_bank.hpp"
#include "mocseg/ground_truth.hpp"
#include "mocseg/merge.hpp"
#include "mocseg/pipeline.hpp"
#include "mocseg/synth.hpp"

namespace py = pybind11;
using namespace mocseg;

namespace {

using PyPolygon = std::vector<std::pair<std::int64_t, std::int64_t>>;

BinaryImage to_image(const py::array& arr) {
  const auto a = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>::ensure(arr);
  if (!a || a.ndim() != 2) throw DomainError("image must be a 2-D array");
  const auto v = a.unchecked<2>();
  BinaryImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (py::ssize_t r = 0; r < a.shape(0); ++r)
    for (py::ssize_t c = 0; c < a.shape(1); ++c)
      if (v(r, c)) img.set(static_cast<int>(r), static_cast<int>(c));
  return img;
}

py::array_t<bool> from_image(const BinaryImage& img) {
  py::array_t<bool> out({img.height(), img.width()});
  auto v = out.mutable_unchecked<2>();
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) v(r, c) = img.at(r, c);
  return out;
}

LineLabeling to_labeling(const py::array& arr) {
  const auto a = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>::ensure(arr);
  if (!a || a.ndim() != 2) throw DomainError("labels must be a 2-D array");
  const auto v = a.unchecked<2>();
  LineLabeling lab(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  int top = 0;
  for (py::ssize_t r = 0; r < a.shape(0); ++r)
    for (py::ssize_t c = 0; c < a.shape(1); ++c) {
      lab.labels(static_cast<int>(r), static_cast<int>(c)) = v(r, c);
      top = std::max(top, static_cast<int>(v(r, c)));
    }
  lab.n_lines = top;
  return lab;
}

py::array_t<std::int32_t> from_labels(const Grid<int>& g) {
  py::array_t<std::int32_t> out({g.height(), g.width()});
  auto v = out.mutable_unchecked<2>();
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c) v(r, c) = g(r, c);
  return out;
}

std::vector<PyPolygon> from_polygons(const PolygonSet& set) {
  std::vector<PyPolygon> out;
  for (const auto& poly : set.polygons) {
    PyPolygon p;
    for (const auto& v : poly) p.emplace_back(v.x, v.y);
    out.push_back(std::move(p));
  }
  return out;
}

PolygonSet to_polygons(const std::vector<PyPolygon>& polys) {
  PolygonSet set;
  for (const auto& p : polys) {
    Polygon poly;
    for (const auto& [x, y] : p) poly.push_back({x, y});
    set.polygons.push_back(std::move(poly));
  }
  return set;
}

py::dict scores_dict(const PageScores& s) {
  py::dict d;
  d["pixel_iu"] = s.pixel_iu;
  d["line_iu"] = s.line_iu;
  d["tp"] = s.tp;
  d["fp"] = s.fp;
  d["fn"] = s.fn;
  d["cl"] = s.cl;
  d["ml"] = s.ml;
  d["el"] = s.el;
  return d;
}

PipelineParams params_from(const std::string& config, bool baseline) {
  PipelineParams p = config.empty() ? PipelineParams{} : parse_params(config);
  if (baseline) p.bank.baseline_mode = true;
  return p;
}

}  // namespace

PYBIND11_MODULE(_mocseg, m) {
  m.doc() = "Text-line segmentation of binarized handwritten pages";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
  py::register_exception<PlacementError>(m, "PlacementError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "load_binary_image",
      [](const std::filesystem::path& path, bool light_fg) {
        return from_image(load_binary_image(path, light_fg ? Polarity::light_is_fg : Polarity::dark_is_fg));
      },
      py::arg("path"), py::arg("light_fg") = false, "Boolean ink mask of a PNG or PGM page.");

  m.def(
      "height_stats",
      [](const py::array& image) {
        const auto comps = connected_components(to_image(image));
        const HeightStats s = component_height_stats(comps);
        return std::make_pair(s.mu, s.sigma);
      },
      py::arg("image"), "(mu, sigma) of connected component bounding-box heights.");

  m.def(
      "build_kernel",
      [](double scale, double orientation, double aspect) {
        const FilterKernel k = build_kernel(scale, orientation, aspect);
        py::array_t<double> out({k.taps.height(), k.taps.width()});
        auto v = out.mutable_unchecked<2>();
        for (int r = 0; r < k.taps.height(); ++r)
          for (int c = 0; c < k.taps.width(); ++c) v(r, c) = k.taps(r, c);
        return out;
      },
      py::arg("scale"), py::arg("orientation"), py::arg("aspect") = 3.0);

  m.def(
      "enhance",
      [](const py::array& image, std::vector<double> scales, double step, double aspect) {
        BankConfig cfg;
        cfg.orientation_step_deg = step;
        cfg.aspect = aspect;
        const ResponseField f = enhance(to_image(image), build_bank(scales, cfg));
        py::array_t<double> resp({f.response.height(), f.response.width()});
        py::array_t<double> orient({f.response.height(), f.response.width()});
        auto rv = resp.mutable_unchecked<2>();
        auto ov = orient.mutable_unchecked<2>();
        for (int r = 0; r < f.response.height(); ++r)
          for (int c = 0; c < f.response.width(); ++c) {
            rv(r, c) = f.response(r, c);
            ov(r, c) = f.arg_orientation(r, c);
          }
        return std::make_pair(resp, orient);
      },
      py::arg("image"), py::arg("scales"), py::arg("orientation_step") = 5.0, py::arg("aspect") = 3.0,
      "Maximum filter response and its orientation per pixel.");

  m.def(
      "segment",
      [](const py::array& image, const std::string& config, bool baseline) {
        const BinaryImage img = to_image(image);
        Segmentation seg;
        {
          py::gil_scoped_release release;
          seg = segment_page(img, params_from(config, baseline));
        }
        return std::make_pair(from_labels(seg.labeling.labels), from_polygons(seg.polygons));
      },
      py::arg("image"), py::arg("config") = "", py::arg("baseline") = false,
      "Segment a page; returns (labels, polygons). config uses the key = value file syntax.");

  m.def(
      "polygons_from_labels", [](const py::array& labels) { return from_polygons(polygons_from_labels(to_labeling(labels))); },
      py::arg("labels"));

  m.def(
      "evaluate",
      [](const py::array& image, const std::vector<PyPolygon>& gt, const std::vector<PyPolygon>& pred,
         double threshold) {
        const BinaryImage img = to_image(image);
        return scores_dict(score_page(masks_from_polygons(to_polygons(gt), img),
                                      masks_from_polygons(to_polygons(pred), img), threshold));
      },
      py::arg("image"), py::arg("gt"), py::arg("pred"), py::arg("threshold") = 0.75,
      "Pixel and line IU of predicted polygons against ground-truth polygons.");

  m.def(
      "evaluate_labels",
      [](const py::array& image, const py::array& gt, const py::array& pred, double threshold) {
        const BinaryImage img = to_image(image);
        return scores_dict(score_page(masks_from_labels(to_labeling(gt), img),
                                      masks_from_labels(to_labeling(pred), img), threshold));
      },
      py::arg("image"), py::arg("gt"), py::arg("pred"), py::arg("threshold") = 0.75);

  m.def(
      "generate_page",
      [](const std::string& spec_json) {
        py::list pages;
        for (const auto& spec : page_specs_from_json(spec_json)) {
          const SyntheticPage p = generate_page(spec);
          pages.append(py::make_tuple(spec.name, from_image(p.image), from_labels(p.truth.labels)));
        }
        return pages;
      },
      py::arg("spec_json"), "List of (name, image, labels) for every page in the JSON spec.");

  m.def(
      "random_page",
      [](std::uint64_t seed) {
        const SyntheticPage p = generate_page(random_page_spec(seed));
        return std::make_pair(from_image(p.image), from_labels(p.truth.labels));
      },
      py::arg("seed"));

  m.def(
      "linearity_weight",
      [](std::pair<double, double> u, std::pair<double, double> v, std::pair<double, double> s,
         std::pair<double, double> t, double gamma) {
        return linearity_weight({u.first, u.second}, {v.first, v.second}, {s.first, s.second},
                                {t.first, t.second}, gamma);
      },
      py::arg("u"), py::arg("v"), py::arg("s"), py::arg("t"), py::arg("gamma") = 5.0);

  m.def("ligature_log_cost", &ligature_log_cost, py::arg("theta_hist"), py::arg("theta_pca"),
        py::arg("gamma") = 50.0, py::arg("literal") = false);

  m.def(
      "minimize_labeling",
      [](const py::array& data, const std::vector<std::tuple<int, int, double>>& neighbors,
         const std::vector<double>& label_costs) {
        const auto d = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(data);
        if (!d || d.ndim() != 2) throw DomainError("data costs must be a 2-D array");
        EnergyProblem p(static_cast<int>(d.shape(0)), static_cast<int>(d.shape(1)));
        const auto v = d.unchecked<2>();
        for (int i = 0; i < p.n_elements; ++i)
          for (int l = 0; l < p.n_labels; ++l) p.data(i, l) = v(i, l);
        for (const auto& [a, b, w] : neighbors) p.neighbors.push_back({a, b, w});
        p.label_cost = label_costs;
        const Labeling f = minimize_labeling(p);
        return std::make_pair(f.assignment, f.energy);
      },
      py::arg("data_cost"), py::arg("neighbors") = std::vector<std::tuple<int, int, double>>{},
      py::arg("label_cost"), "Returns (assignment, energy).");

  m.def(
      "write_page_xml",
      [](const std::filesystem::path& path, const std::vector<PyPolygon>& polys, int width, int height,
         const std::string& image_filename) {
        write_page_xml(path, to_polygons(polys), {image_filename, width, height});
      },
      py::arg("path"), py::arg("polygons"), py::arg("width"), py::arg("height"), py::arg("image_filename") = "");

  m.def(
      "read_page_xml", [](const std::filesystem::path& path) { return from_polygons(read_page_xml(path)); },
      py::arg("path"));

  m.def(
      "write_raw_labels",
      [](const std::filesystem::path& path, const py::array& labels) { write_raw_labels(path, to_labeling(labels)); },
      py::arg("path"), py::arg("labels"));

  m.def(
      "read_raw_labels", [](const std::filesystem::path& path) { return from_labels(read_raw_labels(path).labels); },
      py::arg("path"));
}
