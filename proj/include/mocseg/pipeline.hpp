#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mocseg/assign.hpp"
#include "mocseg/blob_lines.hpp"
#include "mocseg/filter_bank.hpp"
#include "mocseg/ground_truth.hpp"
#include "mocseg/merge.hpp"

namespace mocseg {

struct PipelineParams {
  BankConfig bank;
  LigatureParams ligature;
  MergeParams merge;
  AssignParams assign;
  int knots = 20;
  double validity_factor = 0.8;
  double radius_factor = 18.0;

  /// Throws DomainError when a value is outside its documented range.
  void validate() const;
};

/// Intermediate results, filled only when requested.
struct StageArtifacts {
  HeightStats stats;
  std::vector<double> scales;
  BlobMask blob_mask;
  std::vector<BlobLine> blobs;        // blob lines of the mask
  std::vector<char> valid;            // per blob
  std::vector<BlobLine> children;     // decomposed pieces of invalid blobs
  std::vector<BlobLine> removed;      // children dropped as false ligatures
  std::vector<BlobLine> kept;         // valid blobs plus surviving children
  MergeGraph graph;
  std::vector<BlobLine> merged;
};

struct Segmentation {
  LineLabeling labeling;
  PolygonSet polygons;
};

Segmentation segment_page(const BinaryImage& img, const PipelineParams& params,
                          StageArtifacts* artifacts = nullptr);

/// key = value lines, optionally grouped in [sections]; keys are the field
/// names of the parameter structs (orientation_step_deg, niblack_k, gamma,
/// gamma_merge, beta, ...). Throws FormatError on unknown keys or bad values.
PipelineParams load_params(const std::filesystem::path& path, PipelineParams base = {});
PipelineParams parse_params(const std::string& text, PipelineParams base = {});

}  // namespace mocseg
