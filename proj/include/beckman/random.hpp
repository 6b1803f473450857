#pragma once

#include <cstdint>
#include <random>

namespace beckman {

// Portable deterministic generator. The distributions are derived from the
// raw engine output so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes two values into a seed for an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace beckman
