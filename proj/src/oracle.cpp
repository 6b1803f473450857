#include "beckman/oracle.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "beckman/error.hpp"

namespace beckman {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

OracleResult run_subgradient(const BarycenterProblem& problem, double c,
                             const SubgradientOptions& options) {
  const std::size_t k = problem.marginals.size();
  const std::size_t h = problem.height();
  const std::size_t w = problem.width();

  std::vector<FluxField> flux(k, FluxField(h, w));
  ScalarField mu(h, w);
  for (const auto& m : problem.marginals) mu += m.field();
  mu *= 1.0 / static_cast<double>(k);

  OracleResult best;
  best.barycenter = mu;
  best.flux = flux;
  best.objective = objective_value(flux, mu, problem);
  best.step_scale = c;
  best.best_history.push_back(best.objective);

  std::vector<FluxField> g_flux(k, FluxField(h, w));
  ScalarField g_mu(h, w);
  for (std::size_t t = 1; t <= options.steps; ++t) {
    for (std::size_t j = 0; j < mu.size(); ++j) g_mu[j] = problem.beta * sign(mu[j]);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      ScalarField res = divergence(flux[i]);
      res += problem.marginals[i].field();
      res -= mu;
      for (double& v : res.values()) v = sign(v);
      for (std::size_t j = 0; j < mu.size(); ++j) g_mu[j] -= problem.alpha * res[j];
      FluxField g = divergence_adjoint(res);
      g *= problem.alpha;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        const double n = std::hypot(flux[i].x[j], flux[i].y[j]);
        if (n > 0.0) {
          g.x[j] += flux[i].x[j] / n;
          g.y[j] += flux[i].y[j] / n;
        }
      }
      norm2 += dot(g, g);
      g_flux[i] = std::move(g);
    }
    norm2 += dot(g_mu, g_mu);
    if (norm2 == 0.0) break;  // zero subgradient: stationary

    const double step = c / std::sqrt(static_cast<double>(t)) / std::sqrt(norm2);
    for (std::size_t i = 0; i < k; ++i) {
      g_flux[i] *= -step;
      flux[i] += g_flux[i];
    }
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] -= step * g_mu[j];

    const double f = objective_value(flux, mu, problem);
    if (f < best.objective) {
      best.objective = f;
      best.barycenter = mu;
      best.flux = flux;
    }
    if (options.history_every > 0 && t % options.history_every == 0) {
      best.best_history.push_back(best.objective);
    }
  }
  return best;
}

}  // namespace

double emd_1d(const DensityGrid& mu1, const DensityGrid& mu2) {
  const bool line1 = mu1.height() == 1 || mu1.width() == 1;
  const bool line2 = mu2.height() == 1 || mu2.width() == 1;
  if (!line1 || !line2) throw InputError("emd_1d expects single-row or single-column grids");
  const std::size_t n = mu1.field().size();
  if (mu2.field().size() != n) throw InputError("emd_1d inputs must have equal length");
  const double scale = std::max({mu1.mass(), mu2.mass(), 1.0});
  if (std::abs(mu1.mass() - mu2.mass()) > 1e-9 * scale) {
    std::ostringstream msg;
    msg << std::setprecision(15) << "emd_1d inputs must have equal mass (" << mu1.mass()
        << " vs " << mu2.mass() << ")";
    throw InputError(msg.str());
  }
  double carried = 0.0;
  double cost = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    carried += mu1[j] - mu2[j];
    cost += std::abs(carried);
  }
  return cost;
}

OracleResult subgradient_barycenter(const BarycenterProblem& problem,
                                    const SubgradientOptions& options) {
  problem.validate();
  if (options.step_scales.empty()) throw ConfigError("subgradient oracle needs a step scale");
  double scale = 0.0;
  for (const auto& m : problem.marginals) scale = std::max(scale, m.field().l2_norm());
  if (scale == 0.0) scale = 1.0;

  OracleResult best;
  bool first = true;
  for (double c : options.step_scales) {
    OracleResult run = run_subgradient(problem, c * scale, options);
    if (first || run.objective < best.objective) {
      best = std::move(run);
      first = false;
    }
  }
  return best;
}

}  // namespace beckman
