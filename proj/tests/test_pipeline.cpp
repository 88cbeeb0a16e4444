#include <doctest.h>

#include "mocseg/errors.hpp"
#include "mocseg/evaluation.hpp"
#include "mocseg/pipeline.hpp"
#include "mocseg/synth.hpp"
#include "temp_dir.hpp"

using namespace mocseg;

namespace {

/// Six straight lines at 0, 30, ..., 150 degrees, placed by the generator.
const SyntheticPage& six_orientation_page() {
  static const SyntheticPage page = [] {
    PageSpec spec;
    spec.name = "six";
    spec.width = spec.height = 800;
    spec.seed = 2;
    for (int k = 0; k < 6; ++k) {
      LineSpec l;
      l.orientation = 30.0 * k;
      l.length = 230;
      spec.lines.push_back(l);
    }
    return generate_page(spec);
  }();
  return page;
}

const Segmentation& six_orientation_result(bool baseline) {
  static const Segmentation multi = segment_page(six_orientation_page().image, PipelineParams{});
  static const Segmentation single = [] {
    PipelineParams p;
    p.bank.baseline_mode = true;
    return segment_page(six_orientation_page().image, p);
  }();
  return baseline ? single : multi;
}

PageScores score(const Segmentation& seg) {
  const SyntheticPage& page = six_orientation_page();
  return score_page(masks_from_labels(page.truth, page.image), masks_from_labels(seg.labeling, page.image));
}

}  // namespace

TEST_CASE("a blank page has no lines") {
  const Segmentation seg = segment_page(BinaryImage(50, 40), PipelineParams{});
  CHECK(seg.labeling.n_lines == 0);
  CHECK(seg.polygons.polygons.empty());
}

TEST_CASE("six orientations give six lines, each matched above 0.75") {
  const Segmentation& seg = six_orientation_result(false);
  CHECK(seg.labeling.n_lines == 6);
  CHECK(seg.polygons.polygons.size() == 6);
  const SyntheticPage& page = six_orientation_page();
  const MatchTable t =
      match_pairs(masks_from_labels(page.truth, page.image), masks_from_labels(seg.labeling, page.image));
  CHECK(t.pairs.size() == 6);
  for (const auto& p : t.pairs) CHECK(p.iu > 0.75);
}

TEST_CASE("the single-orientation bank scores lower") {
  const PageScores multi = score(six_orientation_result(false));
  const PageScores single = score(six_orientation_result(true));
  MESSAGE("multi " << multi.pixel_iu << ", single " << single.pixel_iu);
  CHECK(single.pixel_iu < multi.pixel_iu);
}

TEST_CASE("segmentation is deterministic and labels only ink") {
  const SyntheticPage page = generate_page(random_page_spec(31));
  const Segmentation a = segment_page(page.image, PipelineParams{});
  const Segmentation b = segment_page(page.image, PipelineParams{});
  CHECK(a.labeling == b.labeling);
  CHECK(a.polygons == b.polygons);
  CHECK_NOTHROW(a.labeling.validate());
  for (int r = 0; r < page.image.height(); ++r)
    for (int c = 0; c < page.image.width(); ++c)
      if (a.labeling.labels(r, c)) CHECK(page.image.at(r, c));
}

TEST_CASE("artifacts record every stage") {
  StageArtifacts art;
  const Segmentation seg = segment_page(six_orientation_page().image, PipelineParams{}, &art);
  CHECK(art.stats.mu > 0.0);
  CHECK_FALSE(art.scales.empty());
  CHECK_FALSE(art.blobs.empty());
  CHECK(art.valid.size() == art.blobs.size());
  CHECK(art.merged.size() <= art.kept.size());
  CHECK(seg.labeling.n_lines <= static_cast<int>(art.merged.size()));
}

TEST_CASE("baseline mode changes only the orientation set") {
  StageArtifacts a, b;
  PipelineParams p;
  segment_page(six_orientation_page().image, p, &a);
  p.bank.baseline_mode = true;
  segment_page(six_orientation_page().image, p, &b);
  CHECK(a.stats.mu == b.stats.mu);
  CHECK(a.scales == b.scales);
}

TEST_CASE("parameters parse flat and sectioned") {
  const PipelineParams flat = parse_params("orientation_step_deg = 10\nbeta = -3\nknots = 12\n");
  CHECK(flat.bank.orientation_step_deg == 10.0);
  CHECK(flat.assign.beta == -3.0);
  CHECK(flat.knots == 12);
  const PipelineParams sec = parse_params("[bank]\nniblack_k = 0.3\n[merge]\ngamma_merge = 7\n; comment\n");
  CHECK(sec.bank.niblack_k == 0.3);
  CHECK(sec.merge.gamma_merge == 7.0);
  CHECK(sec.ligature.gamma == PipelineParams{}.ligature.gamma);
  PipelineParams base;
  base.radius_factor = 9.0;
  CHECK(parse_params("", base).radius_factor == 9.0);
}

TEST_CASE("bad parameter files are rejected") {
  CHECK_THROWS_AS(parse_params("no_such_key = 1\n"), FormatError);
  CHECK_THROWS_AS(parse_params("gamma = fast\n"), FormatError);
  CHECK_THROWS_AS(parse_params("[bank\nniblack_k = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_params("orientation_step_deg = 0\n"), DomainError);
  CHECK_THROWS_AS(parse_params("niblack_window = 4\n"), DomainError);
  testing_support::TempDir dir;
  CHECK_THROWS_AS(load_params(dir / "missing.ini"), IoError);
}

TEST_CASE("validation covers every range") {
  PipelineParams p;
  CHECK_NOTHROW(p.validate());
  p.assign.discard_percentile = 101;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.bank.aspect = 0.5;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.ligature.deviation_threshold_deg = 120;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.knots = 0;
  CHECK_THROWS_AS(segment_page(BinaryImage(4, 4), p), DomainError);
}
