#include <doctest.h>

#include <cmath>
#include <limits>

#include "beckman/error.hpp"
#include "beckman/image.hpp"
#include "test_util.hpp"

using namespace beckman;
using beckman::testing::TempDir;
using beckman::testing::write_file;

namespace {

ImageTensor quantized_ramp(std::size_t channels, std::size_t h, std::size_t w) {
  ImageTensor img(channels, h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>((i * 37) % 256) / 255.0;
  return img;
}

std::string error_of(const std::filesystem::path& path) {
  try {
    read_pnm(path);
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("PGM and PPM round trip exactly on 8-bit values") {
  TempDir dir("image");
  for (std::size_t channels : {1, 3}) {
    const ImageTensor img = quantized_ramp(channels, 5, 7);
    const auto path = dir / (channels == 1 ? "a.pgm" : "a.ppm");
    write_pnm(path, img);
    const ImageTensor back = read_pnm(path);
    REQUIRE(back.channels() == channels);
    CHECK(back.height() == 5);
    CHECK(back.width() == 7);
    CHECK(linf_distance(back, img) <= 1e-12);
  }
}

TEST_CASE("PNM headers may carry comments and a smaller maxval") {
  TempDir dir("image");
  const auto path = dir / "c.pgm";
  write_file(path, std::string("P5\n# made by hand\n2 1\n# depth\n15\n") + char(15) + char(0));
  const ImageTensor img = read_pnm(path);
  CHECK(img.channel(0)(0, 0) == 1.0);
  CHECK(img.channel(0)(0, 1) == 0.0);
}

TEST_CASE("PNM errors name the offending file") {
  TempDir dir("image");
  const auto missing = dir / "missing.pgm";
  CHECK(error_of(missing).find("missing.pgm") != std::string::npos);

  const auto ascii = dir / "ascii.pgm";
  write_file(ascii, "P2\n1 1\n255\n0\n");
  CHECK(error_of(ascii).find("ascii.pgm") != std::string::npos);

  const auto truncated = dir / "short.pgm";
  write_file(truncated, "P5\n4 4\n255\nab");
  CHECK(error_of(truncated).find("truncated") != std::string::npos);

  const auto deep = dir / "deep.pgm";
  write_file(deep, "P5\n1 1\n65535\n\x01\x02");
  CHECK(error_of(deep).find("deep.pgm") != std::string::npos);

  const auto garbage = dir / "garbage.pgm";
  write_file(garbage, "P5\nwide 1\n255\n");
  CHECK(error_of(garbage).find("malformed") != std::string::npos);
}

TEST_CASE("image tensors validate their range and channel count") {
  CHECK_THROWS_AS(ImageTensor(2, 3, 3), InputError);
  ImageTensor img(1, 2, 2);
  img[3] = 1.5;
  CHECK_THROWS_AS(img.validate(), InputError);
  img.clamp01();
  CHECK_NOTHROW(img.validate());
  CHECK(img[3] == 1.0);
  const ImageTensor rgb = quantized_ramp(3, 2, 3);
  CHECK(ImageTensor::from_flat(3, 2, 3, rgb.flatten()) == rgb);
  CHECK_THROWS_AS(ImageTensor::from_flat(3, 2, 2, rgb.flatten()), InputError);
}

TEST_CASE("image quality measures") {
  const ImageTensor a = quantized_ramp(1, 4, 4);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  ImageTensor b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::clamp(a[i] + (i % 2 ? 0.1 : -0.1), 0.0, 1.0);
  double mse = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mse += (a[i] - b[i]) * (a[i] - b[i]);
    ref += a[i] * a[i];
  }
  CHECK(psnr(b, a) == doctest::Approx(-10.0 * std::log10(mse / 16.0)));
  CHECK(relative_l2_error(b, a) == doctest::Approx(std::sqrt(mse / ref)));
  CHECK(linf_distance(a, b) <= 0.1 + 1e-12);
  CHECK_THROWS_AS(psnr(a, quantized_ramp(1, 4, 5)), InputError);
}

TEST_CASE("gaussian image peaks at the center") {
  const ImageTensor g = gaussian_image(9, 9, 2.0);
  CHECK(g.channel(0)(4, 4) == 1.0);
  CHECK(g.channel(0)(4, 6) == doctest::Approx(std::exp(-0.5)));
  CHECK(g.channel(0)(2, 4) == doctest::Approx(g.channel(0)(4, 2)));
  CHECK_THROWS_AS(gaussian_image(4, 4, 0.0), InputError);
}
