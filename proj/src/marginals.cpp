#include "beckman/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "beckman/error.hpp"

namespace beckman {

namespace {

double sample_bilinear(const ScalarField& f, double sy, double sx) {
  const double fy = std::floor(sy);
  const double fx = std::floor(sx);
  const double wy = sy - fy;
  const double wx = sx - fx;
  const long y0 = static_cast<long>(fy);
  const long x0 = static_cast<long>(fx);
  const long h = static_cast<long>(f.height());
  const long w = static_cast<long>(f.width());
  auto at = [&](long y, long x) -> double {
    if (y < 0 || x < 0 || y >= h || x >= w) return 0.0;
    return f(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  return (1.0 - wy) * ((1.0 - wx) * at(y0, x0) + wx * at(y0, x0 + 1)) +
         wy * ((1.0 - wx) * at(y0 + 1, x0) + wx * at(y0 + 1, x0 + 1));
}

}  // namespace

ScalarField rotate_field(const ScalarField& field, double degrees) {
  if (!(std::abs(degrees) < 90.0)) throw InputError("rotation angle must satisfy |deg| < 90");
  if (degrees == 0.0) return field;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cy = 0.5 * static_cast<double>(field.height() - 1);
  const double cx = 0.5 * static_cast<double>(field.width() - 1);
  ScalarField out(field.height(), field.width());
  for (std::size_t y = 0; y < field.height(); ++y) {
    for (std::size_t x = 0; x < field.width(); ++x) {
      // Destination offset in a y-up frame, rotated back by -theta.
      const double dx = static_cast<double>(x) - cx;
      const double dy = cy - static_cast<double>(y);
      const double sx = c * dx + s * dy;
      const double sy = -s * dx + c * dy;
      out(y, x) = sample_bilinear(field, cy - sy, cx + sx);
    }
  }
  return out;
}

ImageTensor rotate_bilinear(const ImageTensor& image, double degrees) {
  std::vector<ScalarField> planes;
  for (std::size_t ch = 0; ch < image.channels(); ++ch) {
    planes.push_back(rotate_field(image.channel(ch), degrees));
  }
  ImageTensor out(std::move(planes));
  out.clamp01();
  return out;
}

MarginalPair make_marginals(const DensityGrid& channel, double theta) {
  auto rotated = [&](double deg) {
    ScalarField f = rotate_field(channel.field(), deg);
    for (double& v : f.values()) v = std::max(v, 0.0);
    return DensityGrid::normalized(std::move(f), 1.0);
  };
  return {rotated(theta), rotated(-theta)};
}

void BarycentricParams::validate() const {
  if (!(std::abs(theta) < 90.0)) throw ConfigError("theta must satisfy |theta| < 90");
  if (!(alpha > 0.0) || !(beta > 0.0) || !(rho > 0.0)) {
    throw ConfigError("alpha, beta and rho must be positive");
  }
  if (!(intensity_scale > 0.0) || !std::isfinite(intensity_scale)) {
    throw ConfigError("intensity_scale must be positive and finite");
  }
}

ImageTensor barycentric_transform(const ImageTensor& image, const BarycentricParams& params,
                                  const SolverConfig& config,
                                  std::vector<ChannelSolve>* diagnostics) {
  params.validate();
  image.validate();
  std::vector<ScalarField> planes;
  if (diagnostics) diagnostics->clear();
  for (std::size_t ch = 0; ch < image.channels(); ++ch) {
    const DensityGrid channel(image.channel(ch));
    ChannelSolve info;
    info.input_mass = channel.mass();
    ScalarField out(image.height(), image.width());
    if (channel.mass() <= 0.0) {
      info.bypassed = true;
    } else {
      const MarginalPair pair = make_marginals(channel, params.theta);
      const double scale = channel.mass() * params.intensity_scale;
      BarycenterProblem problem{{pair.positive.scaled(scale), pair.negative.scaled(scale)},
                                params.alpha, params.beta, params.rho};
      SolverConfig cfg = config;
      if (params.warm_start) cfg.warm_start = true;
      BarycenterResult solved = solve_barycenter(problem, cfg);
      out = std::move(solved.barycenter);
      for (double& v : out.values()) v = std::max(v, 0.0);
      out *= 1.0 / params.intensity_scale;
      info.barycenter_mass = out.sum();
      info.trace = std::move(solved.trace);
    }
    for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
    planes.push_back(std::move(out));
    if (diagnostics) diagnostics->push_back(std::move(info));
  }
  return ImageTensor(std::move(planes));
}

}  // namespace beckman
