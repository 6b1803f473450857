#include "beckman/prox.hpp"

#include <algorithm>
#include <cmath>

#include "beckman/error.hpp"

namespace beckman {

namespace {

void require_positive(double t, const char* name) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

ScalarField shrink_l1(const ScalarField& x, double t) {
  require_positive(t, "shrinkage threshold");
  ScalarField out = x;
  for (double& v : out.values()) v = soft_threshold(v, t);
  return out;
}

FluxField shrink_l21(const FluxField& m, double t) {
  require_positive(t, "shrinkage threshold");
  FluxField out(m.height(), m.width());
  for (std::size_t i = 0; i < m.x.size(); ++i) {
    const double n = std::hypot(m.x[i], m.y[i]);
    if (n > t) {
      const double scale = (n - t) / n;
      out.x[i] = m.x[i] * scale;
      out.y[i] = m.y[i] * scale;
    }
  }
  return out;
}

ScalarField prox_mu_prime(const ScalarField& mu_prime_prev, const DensityGrid& mu_input,
                          const ScalarField& lambda, double rho, double tau1) {
  require_positive(rho, "rho");
  require_positive(tau1, "tau1");
  const ScalarField& input = mu_input.field();
  if (!mu_prime_prev.same_shape(input) || !lambda.same_shape(input)) {
    throw InputError("prox_mu_prime: fields must share one shape");
  }
  const double rt = rho * tau1;
  const double denom = 1.0 + rt;
  ScalarField out(input.height(), input.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(0.0, (rt * input[i] + mu_prime_prev[i] - tau1 * lambda[i]) / denom);
  }
  return out;
}

}  // namespace beckman
