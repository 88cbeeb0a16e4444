#pragma once

#include <span>
#include <vector>

#include "mocseg/blob_lines.hpp"
#include "mocseg/energy.hpp"
#include "mocseg/ground_truth.hpp"
#include "mocseg/imaging.hpp"

namespace mocseg {

struct AssignParams {
  double beta = -5.0;
  int knn_k = 4;
  double discard_percentile = 95.0;
  double alpha = 0.0;  // 0 selects 1 / (mean nearest-neighbour centroid distance)
};

/// The labeling problem built by assign_components. Label 0 is the discard
/// label; label l >= 1 stands for blobs[l - 1].
EnergyProblem build_assignment_problem(std::span<const ConnectedComponent> components,
                                       std::span<const BlobLine> blobs, std::span<const double> support,
                                       const AssignParams& params = {});

/// Components take the label of the blob line chosen by the energy
/// minimizer; used labels are renumbered 1..K by blob order and discarded
/// components stay 0.
LineLabeling assign_components(std::span<const ConnectedComponent> components, std::span<const BlobLine> blobs,
                               const BinaryImage& img, const AssignParams& params = {});

}  // namespace mocseg
