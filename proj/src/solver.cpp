#include "beckman/solver.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <utility>

#include "beckman/error.hpp"
#include "beckman/prox.hpp"

namespace beckman {

namespace {

double cached_lambda_max(std::size_t height, std::size_t width) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, double> cache;
  const auto key = std::make_pair(height, width);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double value = laplacian_max_eig(height, width);
  std::lock_guard lock(mutex);
  cache.emplace(key, value);
  return value;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be positive and finite");
  }
}

// Running sums of iterates for the ergodic average.
struct Ergodic {
  SolverState sum;
  std::size_t count = 0;

  void add(const SolverState& s) {
    for (std::size_t i = 0; i < s.flux.size(); ++i) {
      sum.flux[i] += s.flux[i];
      sum.mu_prime[i] += s.mu_prime[i];
      sum.slack[i] += s.slack[i];
      sum.lambda[i] += s.lambda[i];
      sum.residual[i] += s.residual[i];
    }
    sum.barycenter += s.barycenter;
    ++count;
  }

  SolverState mean() const {
    SolverState m = sum;
    const double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
    for (std::size_t i = 0; i < m.flux.size(); ++i) {
      m.flux[i] *= inv;
      m.mu_prime[i] *= inv;
      m.slack[i] *= inv;
      m.lambda[i] *= inv;
      m.residual[i] *= inv;
    }
    m.barycenter *= inv;
    m.iteration = count;
    return m;
  }
};

double summed_norm(const std::vector<ScalarField>& fields) {
  double s = 0.0;
  for (const auto& f : fields) s += f.l2_norm();
  return s;
}

}  // namespace

void BarycenterProblem::validate() const {
  if (marginals.size() < 2) throw InputError("barycenter needs at least two marginals");
  for (const auto& m : marginals) {
    if (m.height() != marginals.front().height() || m.width() != marginals.front().width()) {
      throw InputError("all marginals must share one grid shape");
    }
  }
  if (!(alpha > 0.0) || !(beta > 0.0) || !(rho > 0.0)) {
    throw InputError("alpha, beta and rho must be positive");
  }
}

void SolverConfig::validate() const {
  require_positive(tau1, "tau1");
  require_positive(tau2, "tau2");
  if (iterations == 0) throw ConfigError("iterations must be at least 1");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
}

std::string StepSizeReport::describe() const {
  std::ostringstream out;
  out << std::setprecision(6) << "tau1*tau2*(lambda_max+3) = " << product
      << " (lambda_max = " << lambda_max << ")"
      << (satisfied ? " < 1" : " >= 1: convergence is not guaranteed");
  return out.str();
}

StepSizeReport check_step_sizes(const SolverConfig& config, std::size_t height,
                                std::size_t width, std::size_t marginal_count) {
  config.validate();
  StepSizeReport report;
  report.lambda_max = cached_lambda_max(height, width);
  const double tt = config.tau1 * config.tau2;
  report.product = tt * (report.lambda_max + 3.0);
  report.coupled_product =
      tt * (report.lambda_max + 2.0 + static_cast<double>(marginal_count));
  report.satisfied = report.product < 1.0;
  if (!report.satisfied && config.enforce_stepsize) {
    throw ConfigError("step sizes violate the convergence condition: " + report.describe());
  }
  return report;
}

SolverState SolverState::zeros(std::size_t marginal_count, std::size_t height,
                               std::size_t width) {
  SolverState s;
  s.flux.assign(marginal_count, FluxField(height, width));
  s.mu_prime.assign(marginal_count, ScalarField(height, width));
  s.slack.assign(marginal_count, ScalarField(height, width));
  s.lambda.assign(marginal_count, ScalarField(height, width));
  s.residual.assign(marginal_count, ScalarField(height, width));
  s.barycenter = ScalarField(height, width);
  return s;
}

bool SolverState::all_finite() const {
  if (!barycenter.all_finite()) return false;
  for (std::size_t i = 0; i < flux.size(); ++i) {
    if (!flux[i].all_finite() || !mu_prime[i].all_finite() || !slack[i].all_finite() ||
        !lambda[i].all_finite()) {
      return false;
    }
  }
  return true;
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace, bool averaged) {
  out << "iteration,objective,residual\n";
  out << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.iteration << ','
        << (averaged ? r.average_objective : r.objective) << ','
        << (averaged ? r.average_residual : r.residual) << '\n';
  }
}

double objective_value(const std::vector<FluxField>& flux, const ScalarField& barycenter,
                       const BarycenterProblem& problem) {
  if (flux.size() != problem.marginals.size()) {
    throw InputError("objective_value: one flux field per marginal is required");
  }
  double value = problem.beta * barycenter.l1_norm();
  for (std::size_t i = 0; i < flux.size(); ++i) {
    value += flux[i].l21_norm();
    ScalarField slack = divergence(flux[i]);
    slack += problem.marginals[i].field();
    slack -= barycenter;
    value += problem.alpha * slack.l1_norm();
  }
  return value;
}

double objective_value(const SolverState& state, const BarycenterProblem& problem) {
  return objective_value(state.flux, state.barycenter, problem);
}

BarycenterResult solve_barycenter(const BarycenterProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  const std::size_t k = problem.marginals.size();
  const std::size_t h = problem.height();
  const std::size_t w = problem.width();
  const double tau1 = config.tau1;
  const double tau2 = config.tau2;

  BarycenterResult result;
  SolverTrace& trace = result.trace;
  trace.step = check_step_sizes(config, h, w, k);
  if (!trace.step.satisfied) trace.warnings.push_back(trace.step.describe());

  SolverState s = SolverState::zeros(k, h, w);
  if (config.warm_start) {
    for (std::size_t i = 0; i < k; ++i) {
      s.mu_prime[i] = problem.marginals[i].field();
      s.barycenter += problem.marginals[i].field();
    }
    s.barycenter *= 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) s.residual[i] = s.mu_prime[i] - s.barycenter;
  }
  Ergodic avg{SolverState::zeros(k, h, w)};

  auto record = [&](std::size_t iteration) {
    const SolverState mean = avg.mean();
    trace.records.push_back({iteration, objective_value(s, problem), summed_norm(s.residual),
                             objective_value(mean, problem), summed_norm(mean.residual)});
  };

  for (std::size_t t = 1; t <= config.iterations; ++t) {
    // Primal blocks, all driven by the multipliers of the previous sweep.
    ScalarField lambda_sum(h, w);
    for (std::size_t i = 0; i < k; ++i) {
      FluxField step = divergence_adjoint(s.lambda[i]);
      step *= -tau1;
      step += s.flux[i];
      s.flux[i] = shrink_l21(step, tau1);

      s.mu_prime[i] = prox_mu_prime(s.mu_prime[i], problem.marginals[i], s.lambda[i],
                                    problem.rho, tau1);

      ScalarField r = s.slack[i];
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += tau1 * s.lambda[i][j];
      s.slack[i] = shrink_l1(r, problem.alpha * tau1);

      lambda_sum += s.lambda[i];
    }
    {
      ScalarField m = s.barycenter;
      for (std::size_t j = 0; j < m.size(); ++j) m[j] += tau1 * lambda_sum[j];
      s.barycenter = shrink_l1(m, problem.beta * tau1);
    }

    // Dual ascent on the over-relaxed residual 2 res^{t+1} - res^t.
    for (std::size_t i = 0; i < k; ++i) {
      ScalarField res = divergence(s.flux[i]);
      for (std::size_t j = 0; j < res.size(); ++j) {
        res[j] += s.mu_prime[i][j] - s.barycenter[j] - s.slack[i][j];
        s.lambda[i][j] += tau2 * (2.0 * res[j] - s.residual[i][j]);
      }
      s.residual[i] = std::move(res);
    }
    s.iteration = t;

    if (!s.all_finite()) {
      throw DivergenceError(
          "barycenter iterate became non-finite at iteration " + std::to_string(t), t);
    }
    avg.add(s);

    const bool done = t == config.iterations;
    const bool converged =
        config.tolerance > 0.0 && summed_norm(s.residual) <= config.tolerance;
    if (done || converged || (config.trace_every > 0 && t % config.trace_every == 0)) {
      record(t);
    }
    trace.iterations_run = t;
    if (converged && !done) {
      trace.stopped_early = true;
      break;
    }
  }

  result.average = avg.mean();
  result.barycenter = config.report_average ? result.average.barycenter : s.barycenter;
  result.state = std::move(s);
  return result;
}

DistanceResult solve_distance(const DensityGrid& mu1, const DensityGrid& mu2,
                              const SolverConfig& config) {
  config.validate();
  if (mu1.height() != mu2.height() || mu1.width() != mu2.width()) {
    throw InputError("distance inputs must share one grid shape");
  }
  const double scale = std::max({mu1.mass(), mu2.mass(), 1e-300});
  if (std::abs(mu1.mass() - mu2.mass()) > 1e-6 * scale) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "distance inputs must have equal mass (" << mu1.mass()
        << " vs " << mu2.mass() << ")";
    throw InputError(msg.str());
  }
  const std::size_t h = mu1.height();
  const std::size_t w = mu1.width();
  const double tau1 = config.tau1;
  const double tau2 = config.tau2;

  DistanceResult result;
  SolverTrace& trace = result.trace;
  // Only the divergence block is present, so the condition is tau1 tau2 lambda_max < 1.
  trace.step.lambda_max = cached_lambda_max(h, w);
  trace.step.product = tau1 * tau2 * trace.step.lambda_max;
  trace.step.coupled_product = trace.step.product;
  trace.step.satisfied = trace.step.product < 1.0;
  if (!trace.step.satisfied) {
    std::ostringstream msg;
    msg << std::setprecision(6) << "tau1*tau2*lambda_max = " << trace.step.product
        << " >= 1: convergence is not guaranteed";
    if (config.enforce_stepsize) throw ConfigError(msg.str());
    trace.warnings.push_back(msg.str());
  }

  ScalarField offset = mu1.field();
  offset -= mu2.field();

  FluxField flux(h, w);
  ScalarField lambda(h, w);
  ScalarField previous = offset;  // residual of the zero flux
  FluxField flux_sum(h, w);
  ScalarField residual_sum(h, w);

  for (std::size_t t = 1; t <= config.iterations; ++t) {
    FluxField step = divergence_adjoint(lambda);
    step *= -tau1;
    step += flux;
    flux = shrink_l21(step, tau1);

    ScalarField res = divergence(flux);
    res += offset;
    for (std::size_t j = 0; j < res.size(); ++j) {
      lambda[j] += tau2 * (2.0 * res[j] - previous[j]);
    }
    previous = std::move(res);

    if (!flux.all_finite() || !lambda.all_finite()) {
      throw DivergenceError("flux iterate became non-finite at iteration " + std::to_string(t),
                            t);
    }
    flux_sum += flux;
    residual_sum += previous;

    const bool done = t == config.iterations;
    const double residual = previous.l2_norm();
    const bool converged = config.tolerance > 0.0 && residual <= config.tolerance;
    if (done || converged || (config.trace_every > 0 && t % config.trace_every == 0)) {
      const double inv = 1.0 / static_cast<double>(t);
      FluxField mean = flux_sum;
      mean *= inv;
      trace.records.push_back({t, flux.l21_norm(), residual, mean.l21_norm(),
                               residual_sum.l2_norm() * inv});
    }
    trace.iterations_run = t;
    if (converged && !done) {
      trace.stopped_early = true;
      break;
    }
  }

  if (config.report_average) {
    flux_sum *= 1.0 / static_cast<double>(trace.iterations_run);
    result.flux = std::move(flux_sum);
  } else {
    result.flux = std::move(flux);
  }
  result.value = result.flux.l21_norm();
  return result;
}

}  // namespace beckman
