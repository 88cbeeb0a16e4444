#include <doctest.h>

#include <numeric>
#include <algorithm>
#include <random>

#include "mocseg/errors.hpp"
#include "mocseg/evaluation.hpp"
#include "oracles.hpp"

using namespace mocseg;

namespace {

std::vector<int> range(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

LineMasks masks(int w, int h, std::vector<std::vector<int>> lines) {
  LineMasks m;
  m.width = w;
  m.height = h;
  m.lines = std::move(lines);
  return m;
}

BinaryImage random_ink(std::mt19937_64& rng, int w, int h) {
  BinaryImage img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (rng() % 3) img.set(r, c);
  return img;
}

LineLabeling as_labeling(const Grid<int>& g) {
  LineLabeling lab;
  lab.labels = g;
  lab.n_lines = oracle::max_label(g);
  return lab;
}

}  // namespace

TEST_CASE("identical sets match perfectly") {
  const LineMasks gt = masks(10, 10, {range(0, 10), range(20, 35)});
  const MatchTable t = match_pairs(gt, gt);
  REQUIRE(t.pairs.size() == 2);
  for (const auto& p : t.pairs) {
    CHECK(p.gt == p.pred);
    CHECK(p.iu == 1.0);
  }
  const PageScores s = score_page(t);
  CHECK(s.pixel_iu == 1.0);
  CHECK(s.line_iu == 1.0);
}

TEST_CASE("disjoint sets never match") {
  const MatchTable t = match_pairs(masks(10, 10, {range(0, 10)}), masks(10, 10, {range(10, 20), range(30, 31)}));
  CHECK(t.pairs.empty());
  CHECK(t.unmatched_gt == std::vector<int>{1});
  CHECK(t.unmatched_pred == std::vector<int>{1, 2});
  const PageScores s = score_page(t);
  CHECK(s.tp == 0);
  CHECK(s.fn == 10);
  CHECK(s.fp == 11);
  CHECK(s.pixel_iu == 0.0);
  CHECK(s.ml == 1);
  CHECK(s.el == 2);
}

TEST_CASE("IU of 30 shared over 60 total is one half") {
  // gt 0..44, pred 15..59: 30 shared, 60 in the union.
  const MatchTable t = match_pairs(masks(10, 10, {range(0, 45)}), masks(10, 10, {range(15, 60)}));
  REQUIRE(t.pairs.size() == 1);
  CHECK(t.pairs[0].iu == 0.5);
  CHECK(t.pairs[0].tp == 30);
  CHECK(t.pairs[0].fn == 15);
  CHECK(t.pairs[0].fp == 15);
}

TEST_CASE("pixel IU 80 over 100 is 0.8") {
  // gt 0..89, pred 10..99: tp 80, fp 10, fn 10.
  const PixelScore s = pixel_iu(match_pairs(masks(10, 10, {range(0, 90)}), masks(10, 10, {range(10, 100)})));
  CHECK(s.tp == 80);
  CHECK(s.fp == 10);
  CHECK(s.fn == 10);
  CHECK(s.pixel_iu == doctest::Approx(0.8));
}

TEST_CASE("empty sets score one and an empty prediction scores zero") {
  const PageScores none = score_page(masks(5, 5, {}), masks(5, 5, {}));
  CHECK(none.pixel_iu == 1.0);
  CHECK(none.line_iu == 1.0);
  const PageScores miss = score_page(masks(5, 5, {range(0, 5)}), masks(5, 5, {}));
  CHECK(miss.pixel_iu == 0.0);
  CHECK(miss.line_iu == 0.0);
  CHECK(miss.ml == 1);
}

TEST_CASE("line IU of three correct and one missed is 0.75") {
  // Three exact lines plus a gt line with no prediction.
  const LineMasks gt = masks(10, 10, {range(0, 10), range(10, 20), range(20, 30), range(40, 50)});
  const LineMasks pred = masks(10, 10, {range(0, 10), range(10, 20), range(20, 30)});
  const LineScore s = line_iu(match_pairs(gt, pred));
  CHECK(s.cl == 3);
  CHECK(s.ml == 1);
  CHECK(s.el == 0);
  CHECK(s.line_iu == 0.75);
}

TEST_CASE("recall below threshold is missed, precision below is extra") {
  SUBCASE("precision 0.8 recall 0.7") {
    // tp 56, fp 14 (precision 0.8), fn 24 (recall 0.7).
    const LineScore s = line_iu(match_pairs(masks(20, 20, {range(0, 80)}), masks(20, 20, {range(24, 94)})));
    CHECK(s.cl == 0);
    CHECK(s.ml == 1);
    CHECK(s.el == 0);
  }
  SUBCASE("precision 0.7 recall 0.8") {
    // tp 56, fn 14 (recall 0.8), fp 24 (precision 0.7).
    const LineScore s = line_iu(match_pairs(masks(20, 20, {range(24, 94)}), masks(20, 20, {range(0, 80)})));
    CHECK(s.cl == 0);
    CHECK(s.ml == 0);
    CHECK(s.el == 1);
  }
  SUBCASE("exactly at threshold is correct") {
    // tp 75, fp 25, fn 25.
    const LineScore s = line_iu(match_pairs(masks(20, 20, {range(0, 100)}), masks(20, 20, {range(25, 125)})));
    CHECK(s.cl == 1);
    CHECK(s.ml == 0);
    CHECK(s.el == 0);
  }
  SUBCASE("both below counts twice") {
    const LineScore s = line_iu(match_pairs(masks(20, 20, {range(0, 100)}), masks(20, 20, {range(50, 150)})));
    CHECK(s.cl == 0);
    CHECK(s.ml == 1);
    CHECK(s.el == 1);
  }
}

TEST_CASE("greedy matching takes the highest IU first and breaks ties by id") {
  // gt1 overlaps pred1 fully and pred2 partly; gt2 overlaps pred2.
  const LineMasks gt = masks(10, 10, {range(0, 10), range(10, 20)});
  const LineMasks pred = masks(10, 10, {range(0, 12), range(12, 20)});
  const MatchTable t = match_pairs(gt, pred);
  REQUIRE(t.pairs.size() == 2);
  CHECK(t.pairs[0].gt == 1);
  CHECK(t.pairs[0].pred == 1);
  CHECK(t.pairs[1].gt == 2);
  CHECK(t.pairs[1].pred == 2);

  // Two pred lines identical to one gt line: the lower pred id wins.
  const MatchTable tie = match_pairs(masks(10, 10, {range(0, 10)}), masks(10, 10, {range(0, 10), range(0, 10)}));
  REQUIRE(tie.pairs.size() == 1);
  CHECK(tie.pairs[0].pred == 1);
  CHECK(tie.unmatched_pred == std::vector<int>{2});
}

TEST_CASE("dataset means are unweighted") {
  PageScores a, b;
  a.pixel_iu = 0.8;
  a.line_iu = 0.6;
  b.pixel_iu = 0.6;
  b.line_iu = 0.4;
  const std::vector<PageScores> pages{a, b};
  const DatasetMeans m = dataset_means(pages);
  CHECK(m.pixel_iu == doctest::Approx(0.7));
  CHECK(m.line_iu == doctest::Approx(0.5));
  const std::vector<PageScores> one{a};
  CHECK(dataset_means(one).pixel_iu == 0.8);
  CHECK_THROWS_AS(dataset_means(std::vector<PageScores>{}), DomainError);
}

TEST_CASE("only foreground pixels are counted") {
  BinaryImage img(4, 1);
  img.set(0, 0);
  img.set(0, 3);
  LineLabeling gt(4, 1), pred(4, 1);
  gt.labels(0, 0) = gt.labels(0, 1) = 1;
  pred.labels(0, 0) = pred.labels(0, 2) = pred.labels(0, 3) = 1;
  gt.n_lines = pred.n_lines = 1;
  const PageScores s = score_page(masks_from_labels(gt, img), masks_from_labels(pred, img));
  CHECK(s.tp == 1);
  CHECK(s.fp == 1);
  CHECK(s.fn == 0);
}

TEST_CASE("evaluator matches the brute-force oracle") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 150; ++t) {
    const int w = 4 + static_cast<int>(rng() % 61), h = 4 + static_cast<int>(rng() % 61);
    const BinaryImage ink = random_ink(rng, w, h);
    const int n_gt = static_cast<int>(rng() % 5);
    const Grid<int> gt = oracle::random_labels(rng, w, h, n_gt);
    const Grid<int> pred = oracle::perturb_labels(rng, gt, 1 + static_cast<int>(rng() % 4));
    const LineLabeling g = as_labeling(gt), p = as_labeling(pred);
    const PageScores s = score_page(masks_from_labels(g, ink), masks_from_labels(p, ink));
    const oracle::EvalCounts o = oracle::evaluate(gt, g.n_lines, pred, p.n_lines, ink);
    CHECK(s.tp == o.tp);
    CHECK(s.fp == o.fp);
    CHECK(s.fn == o.fn);
    CHECK(s.cl == o.cl);
    CHECK(s.ml == o.ml);
    CHECK(s.el == o.el);
  }
}

TEST_CASE("matched pairs account for every pixel of their lines") {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 40; ++t) {
    const BinaryImage ink = random_ink(rng, 30, 30);
    const Grid<int> gt = oracle::random_labels(rng, 30, 30, 3);
    const Grid<int> pred = oracle::perturb_labels(rng, gt, 3);
    const MatchTable tab = match_pairs(masks_from_labels(as_labeling(gt), ink), masks_from_labels(as_labeling(pred), ink));
    for (const auto& p : tab.pairs) {
      CHECK(p.iu > 0.0);
      CHECK(p.iu <= 1.0);
      CHECK(p.tp + p.fn == tab.gt_sizes[p.gt - 1]);
      CHECK(p.tp + p.fp == tab.pred_sizes[p.pred - 1]);
    }
  }
}

TEST_CASE("IU is symmetric and scores ignore line numbering") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 40; ++t) {
    const BinaryImage ink = random_ink(rng, 32, 24);
    // Compacted so that reversing the ids is a permutation of the same set.
    const Grid<int> gt = compact_labels(oracle::random_labels(rng, 32, 24, 4)).labels;
    const Grid<int> pred = oracle::perturb_labels(rng, gt, 4);
    const LineMasks gm = masks_from_labels(as_labeling(gt), ink), pm = masks_from_labels(as_labeling(pred), ink);
    const MatchTable ab = match_pairs(gm, pm), ba = match_pairs(pm, gm);
    REQUIRE(ab.pairs.size() == ba.pairs.size());
    double sum_ab = 0, sum_ba = 0;
    for (const auto& p : ab.pairs) sum_ab += p.iu;
    for (const auto& p : ba.pairs) sum_ba += p.iu;
    CHECK(sum_ab == doctest::Approx(sum_ba));

    // Reverse the gt numbering.
    const int n = oracle::max_label(gt);
    Grid<int> flipped = gt;
    for (auto& v : flipped.values())
      if (v) v = n + 1 - v;
    const PageScores s0 = score_page(gm, pm);
    const PageScores s1 = score_page(masks_from_labels(as_labeling(flipped), ink), pm);
    CHECK(s0.tp == s1.tp);
    CHECK(s0.fp == s1.fp);
    CHECK(s0.fn == s1.fn);
    CHECK(s0.cl == s1.cl);
    CHECK(s0.ml == s1.ml);
    CHECK(s0.el == s1.el);
  }
}

TEST_CASE("polygon masks use foreground inside each polygon") {
  BinaryImage img(10, 10);
  for (const auto& p : oracle::rect_pixels(2, 2, 3, 7)) img.set(p);
  PolygonSet gt;
  gt.polygons.push_back(Polygon{{0, 0}, {10, 0}, {10, 5}, {0, 5}});
  const LineMasks m = masks_from_polygons(gt, img);
  REQUIRE(m.lines.size() == 1);
  CHECK(m.lines[0].size() == 12);
  const PageScores s = score_page(match_pairs(gt, gt, img));
  CHECK(s.pixel_iu == 1.0);
  CHECK(s.line_iu == 1.0);
}
