#include "beckman/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "beckman/error.hpp"

namespace beckman {

namespace {

void require_same_dims(const ImageTensor& a, const ImageTensor& b) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
    throw InputError("image dimensions differ");
  }
}

// Reads the next header integer, skipping whitespace and '#' comments.
long read_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (true) {
    while (c != EOF && std::isspace(c)) c = in.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    break;
  }
  if (c == EOF || !std::isdigit(c)) throw IoError(path.string() + ": malformed PNM header");
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1'000'000) throw IoError(path.string() + ": PNM header value too large");
    c = in.get();
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (c == EOF || !std::isspace(c)) throw IoError(path.string() + ": malformed PNM header");
  return value;
}

}  // namespace

ImageTensor::ImageTensor(std::size_t channels, std::size_t height, std::size_t width) {
  if (channels != 1 && channels != 3) throw InputError("images have 1 or 3 channels");
  planes_.assign(channels, ScalarField(height, width));
}

ImageTensor::ImageTensor(std::vector<ScalarField> planes) : planes_(std::move(planes)) {
  if (planes_.size() != 1 && planes_.size() != 3) {
    throw InputError("images have 1 or 3 channels");
  }
  for (const auto& p : planes_) {
    if (!p.same_shape(planes_[0])) throw InputError("image channels differ in shape");
  }
}

double ImageTensor::operator[](std::size_t i) const {
  const std::size_t plane = height() * width();
  return planes_[i / plane][i % plane];
}

double& ImageTensor::operator[](std::size_t i) {
  const std::size_t plane = height() * width();
  return planes_[i / plane][i % plane];
}

std::vector<double> ImageTensor::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& p : planes_) out.insert(out.end(), p.values().begin(), p.values().end());
  return out;
}

ImageTensor ImageTensor::from_flat(std::size_t channels, std::size_t height, std::size_t width,
                                   const std::vector<double>& values) {
  if (values.size() != channels * height * width) {
    throw InputError("flat image size does not match its dimensions");
  }
  std::vector<ScalarField> planes;
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    planes.emplace_back(height, width,
                        std::vector<double>(values.begin() + c * plane,
                                            values.begin() + (c + 1) * plane));
  }
  return ImageTensor(std::move(planes));
}

void ImageTensor::validate() const {
  for (const auto& p : planes_) {
    for (double v : p.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw InputError("image values must lie in [0, 1]");
    }
  }
}

void ImageTensor::clamp01() noexcept {
  for (auto& p : planes_) {
    for (double& v : p.values()) v = std::clamp(v, 0.0, 1.0);
  }
}

double ImageTensor::mass() const noexcept {
  double s = 0.0;
  for (const auto& p : planes_) s += p.sum();
  return s;
}

ImageTensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError(path.string() + ": not a binary PGM (P5) or PPM (P6) file");
  }
  const std::size_t channels = magic[1] == '5' ? 1 : 3;
  const long width = read_header_int(in, path);
  const long height = read_header_int(in, path);
  const long maxval = read_header_int(in, path);
  if (width <= 0 || height <= 0) throw IoError(path.string() + ": empty image");
  if (maxval <= 0 || maxval > 255) {
    throw IoError(path.string() + ": only 8-bit samples (maxval <= 255) are supported");
  }
  const std::size_t h = static_cast<std::size_t>(height);
  const std::size_t w = static_cast<std::size_t>(width);
  std::vector<unsigned char> raster(channels * h * w);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw IoError(path.string() + ": truncated raster");
  }
  ImageTensor image(channels, h, w);
  const double scale = static_cast<double>(maxval);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        // Division keeps k / 255 bit-identical to values quantized the same way.
        const double v = raster[(y * w + x) * channels + c] / scale;
        image.channel(c)(y, x) = std::min(v, 1.0);
      }
    }
  }
  return image;
}

void write_pnm(const std::filesystem::path& path, const ImageTensor& image) {
  if (image.channels() == 0) throw InputError("cannot write an empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const std::size_t channels = image.channels();
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  out << (channels == 1 ? "P5" : "P6") << '\n' << w << ' ' << h << "\n255\n";
  std::vector<unsigned char> raster(channels * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = std::clamp(image.channel(c)(y, x), 0.0, 1.0);
        raster[(y * w + x) * channels + c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

double psnr(const ImageTensor& estimate, const ImageTensor& reference) {
  require_same_dims(estimate, reference);
  double sq = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = estimate[i] - reference[i];
    sq += d * d;
  }
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sq / static_cast<double>(reference.size());
  return -10.0 * std::log10(mse);
}

double relative_l2_error(const ImageTensor& estimate, const ImageTensor& reference) {
  require_same_dims(estimate, reference);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = estimate[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double linf_distance(const ImageTensor& a, const ImageTensor& b) {
  require_same_dims(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ImageTensor gaussian_image(std::size_t height, std::size_t width, double sigma, double dy,
                           double dx) {
  if (!(sigma > 0.0)) throw InputError("gaussian sigma must be positive");
  ImageTensor img(1, height, width);
  const double cy = (static_cast<double>(height) - 1.0) / 2.0 + dy;
  const double cx = (static_cast<double>(width) - 1.0) / 2.0 + dx;
  ScalarField& f = img.channel(0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double ry = static_cast<double>(y) - cy;
      const double rx = static_cast<double>(x) - cx;
      f(y, x) = std::exp(-(rx * rx + ry * ry) / (2.0 * sigma * sigma));
    }
  }
  return img;
}

}  // namespace beckman
