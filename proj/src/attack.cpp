#include "beckman/attack.hpp"

#include <algorithm>

#include "beckman/error.hpp"
#include "beckman/random.hpp"

namespace beckman {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
  if (steps == 0) throw ConfigError("attack steps must be at least 1");
  if (!(step_size >= 0.0)) throw ConfigError("attack step size must be nonnegative");
  if (step_size * static_cast<double>(steps) < epsilon * (1.0 - 1e-12)) {
    throw ConfigError("attack step_size * steps must cover epsilon");
  }
}

AttackConfig AttackConfig::fgsm(double epsilon) { return {epsilon, 1, epsilon, false}; }

AttackConfig AttackConfig::pgd(std::size_t steps, double epsilon) {
  return {epsilon, steps, epsilon / 4.0, true};
}

ImageTensor attack_fgsm(const MlpModel& model, const ImageTensor& image, std::size_t label,
                        const AttackConfig& config) {
  config.validate();
  const ImageTensor g = grad_input(model, image, label);
  ImageTensor adv = image;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    adv[i] = std::clamp(image[i] + config.epsilon * sign(g[i]), 0.0, 1.0);
  }
  return adv;
}

ImageTensor attack_pgd(const MlpModel& model, const ImageTensor& image, std::size_t label,
                       const AttackConfig& config, std::uint64_t seed) {
  config.validate();
  const double eps = config.epsilon;
  auto project = [&](ImageTensor& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::clamp(std::clamp(x[i], image[i] - eps, image[i] + eps), 0.0, 1.0);
    }
  };
  ImageTensor adv = image;
  if (config.random_start && eps > 0.0) {
    Rng rng(seed);
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += rng.uniform(-eps, eps);
    project(adv);
  }
  for (std::size_t k = 0; k < config.steps; ++k) {
    const ImageTensor g = grad_input(model, adv, label);
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += config.step_size * sign(g[i]);
    project(adv);
  }
  return adv;
}

ImageTensor attack(const MlpModel& model, const ImageTensor& image, std::size_t label,
                   const AttackConfig& config, std::uint64_t seed) {
  if (config.steps == 1 && !config.random_start) {
    return attack_fgsm(model, image, label, config);
  }
  return attack_pgd(model, image, label, config, seed);
}

}  // namespace beckman
