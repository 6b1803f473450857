#pragma once

#include <cstddef>
#include <cstdint>

#include "beckman/image.hpp"
#include "beckman/mlp.hpp"

namespace beckman {

inline constexpr double kDefaultEpsilon = 8.0 / 255.0;

// l-infinity attack budget in [0, 1] intensity units.
struct AttackConfig {
  double epsilon = kDefaultEpsilon;
  std::size_t steps = 1;
  double step_size = kDefaultEpsilon;
  bool random_start = false;

  // Throws ConfigError unless 0 <= epsilon < 1, steps >= 1 and
  // step_size * steps >= epsilon.
  void validate() const;

  static AttackConfig fgsm(double epsilon = kDefaultEpsilon);
  // step_size = epsilon / 4 with a random start.
  static AttackConfig pgd(std::size_t steps, double epsilon = kDefaultEpsilon);
};

// clamp(image + epsilon * sign(grad), 0, 1).
ImageTensor attack_fgsm(const MlpModel& model, const ImageTensor& image, std::size_t label,
                        const AttackConfig& config);

// Signed-gradient ascent, each step projected onto the epsilon ball around
// the original image and onto [0, 1]. The seed drives the random start.
ImageTensor attack_pgd(const MlpModel& model, const ImageTensor& image, std::size_t label,
                       const AttackConfig& config, std::uint64_t seed = 0);

// Dispatches to FGSM for single-step configs without a random start.
ImageTensor attack(const MlpModel& model, const ImageTensor& image, std::size_t label,
                   const AttackConfig& config, std::uint64_t seed = 0);

}  // namespace beckman
