#pragma once

#include <vector>

#include "beckman/grid.hpp"
#include "beckman/image.hpp"
#include "beckman/solver.hpp"

namespace beckman {

// Rotation about the grid center with bilinear interpolation. Samples that
// fall outside the source read zero. Positive angles turn counterclockwise
// as displayed (y axis pointing down). |degrees| < 90.
ScalarField rotate_field(const ScalarField& field, double degrees);

// Per-channel rotate_field, clamped to [0, 1].
ImageTensor rotate_bilinear(const ImageTensor& image, double degrees);

struct MarginalPair {
  DensityGrid positive;  // rotated by +theta
  DensityGrid negative;  // rotated by -theta
};

// Unit-mass marginals from the +theta and -theta rotations of a channel. A
// rotation with no mass left maps to the uniform density.
MarginalPair make_marginals(const DensityGrid& channel, double theta = 4.0);

struct BarycentricParams {
  double theta = 4.0;
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.5;
  // Marginals enter the solver in intensity units multiplied by this factor.
  // The relaxed marginal penalty shifts the solution by beta / (2 rho) solver
  // units, i.e. beta / (2 rho intensity_scale) in pixel intensity.
  double intensity_scale = 255.0;
  // Start the solver from the marginals (see SolverConfig::warm_start). At
  // this scale a zero start is still far from its fixed point after 200
  // iterations.
  bool warm_start = true;

  void validate() const;
};

struct ChannelSolve {
  SolverTrace trace;
  double input_mass = 0.0;
  double barycenter_mass = 0.0;
  bool bypassed = false;  // zero-mass channel, solver not run
};

// Per channel: unit-mass marginals, rescaled to the channel mass, solved for
// the barycenter, mapped back by 1 / intensity_scale and clamped to [0, 1].
ImageTensor barycentric_transform(const ImageTensor& image, const BarycentricParams& params,
                                  const SolverConfig& config,
                                  std::vector<ChannelSolve>* diagnostics = nullptr);

}  // namespace beckman
