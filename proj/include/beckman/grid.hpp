#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace beckman {

// Dense real field on a height x width grid, stored row-major. Row index y
// runs down the image, column index x runs across.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::size_t height, std::size_t width, double fill = 0.0);
  ScalarField(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
  double operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ScalarField& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const noexcept;

  double sum() const noexcept;
  double l1_norm() const noexcept;
  double l2_norm() const noexcept;
  double max_abs() const noexcept;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s) noexcept;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

double dot(const ScalarField& a, const ScalarField& b);

// Nonnegative mass distribution on a grid.
class DensityGrid {
 public:
  DensityGrid() = default;
  explicit DensityGrid(ScalarField field);

  // Rescales a nonnegative field to the requested total mass. A field with
  // zero mass becomes the uniform density of that mass.
  static DensityGrid normalized(ScalarField field, double mass = 1.0);

  const ScalarField& field() const noexcept { return field_; }
  double mass() const noexcept { return mass_; }
  std::size_t height() const noexcept { return field_.height(); }
  std::size_t width() const noexcept { return field_.width(); }

  double operator()(std::size_t y, std::size_t x) const { return field_(y, x); }
  double operator[](std::size_t i) const { return field_[i]; }

  DensityGrid scaled(double factor) const;

 private:
  ScalarField field_;
  double mass_ = 0.0;
};

// Collocated per-cell flux (x, y). Components addressed outside the grid are
// zero. On a single-row grid only the x component carries flux; on a
// single-column grid (height > 1) only the y component does.
struct FluxField {
  ScalarField x;
  ScalarField y;

  FluxField() = default;
  FluxField(std::size_t height, std::size_t width);
  FluxField(ScalarField fx, ScalarField fy);

  std::size_t height() const noexcept { return x.height(); }
  std::size_t width() const noexcept { return x.width(); }
  bool all_finite() const noexcept { return x.all_finite() && y.all_finite(); }

  // Sum over cells of the Euclidean norm of the per-cell vector.
  double l21_norm() const noexcept;

  FluxField& operator+=(const FluxField& other);
  FluxField& operator*=(double s) noexcept;

  friend bool operator==(const FluxField&, const FluxField&) = default;
};

double dot(const FluxField& a, const FluxField& b);

bool x_flux_active(std::size_t height, std::size_t width) noexcept;
bool y_flux_active(std::size_t height, std::size_t width) noexcept;

// out(y,x) = (fx(y,x) - fx(y,x-1)) + (fy(y,x) - fy(y-1,x)).
ScalarField divergence(const FluxField& m);

// Adjoint of divergence: <divergence(m), l> == <m, divergence_adjoint(l)>.
FluxField divergence_adjoint(const ScalarField& lambda);

struct PowerIterationOptions {
  std::uint64_t seed = 0x5eed;
  std::size_t max_iterations = 10000;
  double tolerance = 1e-6;
};

// Largest eigenvalue of D D^T, where D is the divergence matrix on the grid.
// Throws ConvergenceError when the budget is exhausted.
double laplacian_max_eig(std::size_t height, std::size_t width,
                         const PowerIterationOptions& options = {});

}  // namespace beckman
