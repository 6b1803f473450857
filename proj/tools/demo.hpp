#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "beckman/image.hpp"
#include "beckman/marginals.hpp"
#include "beckman/mlp.hpp"
#include "beckman/solver.hpp"

namespace beckman::cli {

enum class DemoNoise { kNone, kUniform, kFgsm, kAll };

DemoNoise parse_demo_noise(const std::string& name);

struct DemoOptions {
  DemoNoise noise = DemoNoise::kAll;
  std::size_t size = 64;
  double sigma = 8.0;
  double uniform_amplitude = 0.2;
  double epsilon = 8.0 / 255.0;
  std::uint64_t seed = 0;
  BarycentricParams barycenter;
  SolverConfig solver;
};

struct DemoRow {
  std::string variant;  // clean, uniform or fgsm
  ImageTensor input;
  ImageTensor barycenter;
  double psnr_input = 0.0;       // input vs clean
  double psnr_barycenter = 0.0;  // barycenter vs clean
  double relative_error = 0.0;   // barycenter vs clean, l2
};

struct DemoResult {
  ImageTensor clean;
  std::vector<DemoRow> rows;
  std::vector<std::string> warnings;
};

// Small classifier separating round from elongated Gaussian blobs; the fgsm
// variant attacks the clean image against it.
MlpModel train_blob_model(std::size_t size, std::uint64_t seed);

DemoResult run_gaussian_demo(const DemoOptions& options);

// Writes <variant>.pgm and <variant>_barycenter.pgm per row plus psnr.csv.
void write_demo(const std::filesystem::path& dir, const DemoResult& result);

}  // namespace beckman::cli
