#include "beckman/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "beckman/error.hpp"
#include "beckman/random.hpp"

namespace beckman {

namespace {

void require_shape(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw InputError("grid dimensions must be positive");
  }
}

void require_same_shape(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << "shape mismatch: " << a.height() << "x" << a.width() << " vs " << b.height()
        << "x" << b.width();
    throw InputError(msg.str());
  }
}

}  // namespace

ScalarField::ScalarField(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
  require_shape(height, width);
  values_.assign(height * width, fill);
}

ScalarField::ScalarField(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  require_shape(height, width);
  if (values_.size() != height * width) {
    throw InputError("field value count does not match its dimensions");
  }
  if (!all_finite()) throw InputError("field contains non-finite values");
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ScalarField::sum() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double ScalarField::l1_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s;
}

double ScalarField::l2_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DensityGrid::DensityGrid(ScalarField field) : field_(std::move(field)) {
  if (field_.empty()) throw InputError("density grid is empty");
  for (double v : field_.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InputError("density values must be finite and nonnegative");
    }
  }
  mass_ = field_.sum();
}

DensityGrid DensityGrid::normalized(ScalarField field, double mass) {
  DensityGrid grid(std::move(field));
  if (grid.mass_ > 0.0) {
    grid.field_ *= mass / grid.mass_;
  } else {
    const double uniform = mass / static_cast<double>(grid.field_.size());
    for (double& v : grid.field_.values()) v = uniform;
  }
  grid.mass_ = grid.field_.sum();
  return grid;
}

DensityGrid DensityGrid::scaled(double factor) const {
  if (!(factor >= 0.0)) throw InputError("density scale factor must be nonnegative");
  ScalarField f = field_;
  f *= factor;
  return DensityGrid(std::move(f));
}

FluxField::FluxField(std::size_t height, std::size_t width)
    : x(height, width), y(height, width) {}

FluxField::FluxField(ScalarField fx, ScalarField fy) : x(std::move(fx)), y(std::move(fy)) {
  require_same_shape(x, y);
}

double FluxField::l21_norm() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::hypot(x[i], y[i]);
  return s;
}

FluxField& FluxField::operator+=(const FluxField& other) {
  x += other.x;
  y += other.y;
  return *this;
}

FluxField& FluxField::operator*=(double s) noexcept {
  x *= s;
  y *= s;
  return *this;
}

double dot(const FluxField& a, const FluxField& b) { return dot(a.x, b.x) + dot(a.y, b.y); }

bool x_flux_active(std::size_t height, std::size_t width) noexcept {
  return width > 1 || height == 1;
}

bool y_flux_active(std::size_t height, std::size_t /*width*/) noexcept { return height > 1; }

ScalarField divergence(const FluxField& m) {
  const std::size_t h = m.height();
  const std::size_t w = m.width();
  ScalarField out(h, w);
  if (x_flux_active(h, w)) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out(y, x) += m.x(y, x) - (x > 0 ? m.x(y, x - 1) : 0.0);
      }
    }
  }
  if (y_flux_active(h, w)) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out(y, x) += m.y(y, x) - (y > 0 ? m.y(y - 1, x) : 0.0);
      }
    }
  }
  return out;
}

FluxField divergence_adjoint(const ScalarField& lambda) {
  const std::size_t h = lambda.height();
  const std::size_t w = lambda.width();
  FluxField out(h, w);
  if (x_flux_active(h, w)) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out.x(y, x) = lambda(y, x) - (x + 1 < w ? lambda(y, x + 1) : 0.0);
      }
    }
  }
  if (y_flux_active(h, w)) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out.y(y, x) = lambda(y, x) - (y + 1 < h ? lambda(y + 1, x) : 0.0);
      }
    }
  }
  return out;
}

double laplacian_max_eig(std::size_t height, std::size_t width,
                         const PowerIterationOptions& options) {
  require_shape(height, width);
  Rng rng(options.seed);
  ScalarField v(height, width);
  for (double& e : v.values()) e = rng.uniform(0.5, 1.5);
  v *= 1.0 / v.l2_norm();

  double estimate = 0.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    ScalarField next = divergence(divergence_adjoint(v));
    const double rayleigh = dot(v, next);
    const double norm = next.l2_norm();
    if (norm == 0.0) return 0.0;
    next *= 1.0 / norm;
    v = std::move(next);
    if (it > 0 && std::abs(rayleigh - estimate) <= options.tolerance * 1e-2 * rayleigh) {
      return rayleigh;
    }
    estimate = rayleigh;
  }
  std::ostringstream msg;
  msg << "power iteration for the " << height << "x" << width
      << " Laplacian did not converge in " << options.max_iterations
      << " iterations (last estimate " << estimate << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace beckman
