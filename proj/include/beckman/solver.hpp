#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "beckman/grid.hpp"

namespace beckman {

// Barycenter of K >= 2 marginals with unbalanced slack:
//   min  sum_i |M_i|_{2,1} + alpha sum_i |r_i|_1 + beta |mu|_1
//   s.t. div(M_i) + mu_i - mu = r_i
// solved through the relaxation that replaces mu_i by mu_i' with the
// quadratic penalty (rho/2)|mu_i' - mu_i|^2, mu_i' >= 0.
struct BarycenterProblem {
  std::vector<DensityGrid> marginals;
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.5;

  void validate() const;
  std::size_t height() const { return marginals.at(0).height(); }
  std::size_t width() const { return marginals.at(0).width(); }
};

struct SolverConfig {
  double tau1 = 0.1;
  double tau2 = 1.0;
  std::size_t iterations = 200;
  // Record a trace row every this many iterations; 0 records only the end.
  std::size_t trace_every = 0;
  // Turn a violated step-size condition into a ConfigError.
  bool enforce_stepsize = false;
  // Report the running average of the iterates instead of the last one.
  bool report_average = false;
  // Start mu_i' at the marginals and mu at their mean instead of zero.
  bool warm_start = false;
  // Stop early once the summed constraint residual drops below this; 0 disables.
  double tolerance = 0.0;

  void validate() const;
};

struct StepSizeReport {
  double lambda_max = 0.0;
  // tau1 * tau2 * (lambda_max + 3): the published sufficient condition.
  double product = 0.0;
  // tau1 * tau2 * |K K^T| for the coupled operator where all K constraints
  // share the barycenter block, i.e. lambda_max + 2 + K.
  double coupled_product = 0.0;
  bool satisfied = false;

  std::string describe() const;
};

// Throws ConfigError when config.enforce_stepsize is set and the condition
// fails.
StepSizeReport check_step_sizes(const SolverConfig& config, std::size_t height,
                                std::size_t width, std::size_t marginal_count = 2);

struct SolverState {
  std::vector<FluxField> flux;           // M_i
  std::vector<ScalarField> mu_prime;     // mu_i'
  std::vector<ScalarField> slack;        // r_i
  ScalarField barycenter;                // mu
  std::vector<ScalarField> lambda;       // multipliers
  std::vector<ScalarField> residual;     // div(M_i) + mu_i' - mu - r_i at this iterate
  std::size_t iteration = 0;

  static SolverState zeros(std::size_t marginal_count, std::size_t height, std::size_t width);
  bool all_finite() const;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
  double average_objective = 0.0;
  double average_residual = 0.0;
};

struct SolverTrace {
  StepSizeReport step;
  std::vector<TraceRecord> records;
  std::vector<std::string> warnings;
  std::size_t iterations_run = 0;
  bool stopped_early = false;
};

// CSV with header "iteration,objective,residual". With averaged set the
// objective and residual columns hold the averaged-iterate values.
void write_trace_csv(std::ostream& out, const SolverTrace& trace, bool averaged);

struct BarycenterResult {
  ScalarField barycenter;
  SolverState state;
  SolverState average;
  SolverTrace trace;
};

BarycenterResult solve_barycenter(const BarycenterProblem& problem, const SolverConfig& config);

struct DistanceResult {
  double value = 0.0;
  FluxField flux;
  SolverTrace trace;
};

// Balanced transport distance min |M|_{2,1} s.t. div(M) + mu1 - mu2 = 0.
// Masses must agree to 1e-6 relative.
DistanceResult solve_distance(const DensityGrid& mu1, const DensityGrid& mu2,
                              const SolverConfig& config);

// Barycenter objective with the slack eliminated through its constraint:
// sum_i |M_i|_{2,1} + alpha sum_i |div(M_i) + mu_i - mu|_1 + beta |mu|_1.
double objective_value(const std::vector<FluxField>& flux, const ScalarField& barycenter,
                       const BarycenterProblem& problem);
double objective_value(const SolverState& state, const BarycenterProblem& problem);

}  // namespace beckman
