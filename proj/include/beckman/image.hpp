#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "beckman/grid.hpp"

namespace beckman {

// One or three channel image with intensities in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t channels, std::size_t height, std::size_t width);
  explicit ImageTensor(std::vector<ScalarField> planes);

  std::size_t channels() const noexcept { return planes_.size(); }
  std::size_t height() const noexcept { return planes_.empty() ? 0 : planes_[0].height(); }
  std::size_t width() const noexcept { return planes_.empty() ? 0 : planes_[0].width(); }
  std::size_t size() const noexcept { return channels() * height() * width(); }

  const ScalarField& channel(std::size_t c) const { return planes_.at(c); }
  ScalarField& channel(std::size_t c) { return planes_.at(c); }

  // Flat channel-major access.
  double operator[](std::size_t i) const;
  double& operator[](std::size_t i);

  std::vector<double> flatten() const;
  static ImageTensor from_flat(std::size_t channels, std::size_t height, std::size_t width,
                               const std::vector<double>& values);

  // Throws InputError unless every value is finite and inside [0, 1].
  void validate() const;
  void clamp01() noexcept;
  double mass() const noexcept;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::vector<ScalarField> planes_;
};

// Binary 8-bit PGM (P5) and PPM (P6). Samples are scaled linearly to [0, 1]
// by the header maxval. Errors carry the offending path.
ImageTensor read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageTensor& image);

// Peak signal-to-noise ratio in dB with peak 1; infinite for identical images.
double psnr(const ImageTensor& estimate, const ImageTensor& reference);
// |estimate - reference|_2 / |reference|_2.
double relative_l2_error(const ImageTensor& estimate, const ImageTensor& reference);
double linf_distance(const ImageTensor& a, const ImageTensor& b);

// Single-channel isotropic Gaussian with peak 1 at ((height-1)/2, (width-1)/2),
// offset by (dy, dx) pixels.
ImageTensor gaussian_image(std::size_t height, std::size_t width, double sigma,
                           double dy = 0.0, double dx = 0.0);

}  // namespace beckman
