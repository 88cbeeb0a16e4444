#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mocseg {

struct NeighborPair {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

/// Discrete labeling energy
///   E(f) = sum_c D(c, f_c) + sum_{(c,c') in N} w_cc' [f_c != f_c'] + sum_{l used} h_l.
/// Elements and labels are 0-based.
struct EnergyProblem {
  int n_elements = 0;
  int n_labels = 0;
  std::vector<double> data_cost;  // n_elements x n_labels, row-major
  std::vector<NeighborPair> neighbors;
  std::vector<double> label_cost;  // one per label, >= 0

  EnergyProblem() = default;
  EnergyProblem(int n, int m);

  double& data(int element, int label) { return data_cost[static_cast<std::size_t>(element) * n_labels + label]; }
  double data(int element, int label) const {
    return data_cost[static_cast<std::size_t>(element) * n_labels + label];
  }

  /// Throws DomainError on wrong sizes, negative weights or label costs,
  /// non-finite values, self pairs or duplicate unordered pairs.
  void validate() const;
};

struct Labeling {
  std::vector<int> assignment;
  double energy = 0.0;
  std::vector<double> sweep_energies;  // energy before the first sweep, then after each sweep
};

struct SolverOptions {
  int max_sweeps = 100;
  // After expansion converges, instances with at most this many labelings are
  // finished by exhaustive branch and bound seeded with the expansion result.
  std::uint64_t exact_limit = 65536;
};

/// Throws DomainError when the assignment has the wrong length or an unknown label.
double evaluate_energy(const EnergyProblem& problem, std::span<const int> assignment);

/// Expansion moves with label costs, each solved exactly by a minimum cut.
/// Labels are swept in ascending order starting from the per-element data argmin.
Labeling minimize_labeling(const EnergyProblem& problem, const SolverOptions& options = {});

}  // namespace mocseg
