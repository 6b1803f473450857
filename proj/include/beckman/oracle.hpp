#pragma once

#include <cstddef>
#include <vector>

#include "beckman/grid.hpp"
#include "beckman/solver.hpp"

namespace beckman {

// Exact 1-D Wasserstein-1 distance: sum_k |sum_{j<=k} (mu1[j] - mu2[j])|.
// Accepts single-row or single-column grids of equal length and mass.
double emd_1d(const DensityGrid& mu1, const DensityGrid& mu2);

struct SubgradientOptions {
  std::size_t steps = 40000;
  // Step size c / sqrt(t) along the normalized subgradient; each multiplier
  // here is scaled by the largest marginal l2 norm and tried in turn.
  std::vector<double> step_scales = {1.0, 0.3, 0.1, 0.03};
  // Stride of the best-objective history.
  std::size_t history_every = 100;
};

struct OracleResult {
  ScalarField barycenter;
  std::vector<FluxField> flux;
  double objective = 0.0;
  double step_scale = 0.0;
  // Best objective so far, sampled every history_every steps of the winning run.
  std::vector<double> best_history;
};

// Reference barycenter from projected-free subgradient descent on
//   sum_i |M_i|_{2,1} + alpha sum_i |div(M_i) + mu_i - mu|_1 + beta |mu|_1.
// Intended for grids up to 8x8.
OracleResult subgradient_barycenter(const BarycenterProblem& problem,
                                    const SubgradientOptions& options = {});

}  // namespace beckman
