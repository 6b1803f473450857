#pragma once

#include "beckman/grid.hpp"

namespace beckman {

// Scalar soft threshold: sign(v) * max(|v| - t, 0).
inline double soft_threshold(double v, double t) noexcept {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

ScalarField shrink_l1(const ScalarField& x, double t);

// Per-cell vector shrinkage v * max(|v| - t, 0) / |v|; zero vectors stay zero.
FluxField shrink_l21(const FluxField& m, double t);

// Closed-form update of the relaxed marginal:
// max{0, (rho*tau1*input + prev - tau1*lambda) / (1 + rho*tau1)}.
ScalarField prox_mu_prime(const ScalarField& mu_prime_prev, const DensityGrid& mu_input,
                          const ScalarField& lambda, double rho, double tau1);

}  // namespace beckman
