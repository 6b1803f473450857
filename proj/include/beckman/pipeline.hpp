#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "beckman/attack.hpp"
#include "beckman/dataset.hpp"
#include "beckman/info.hpp"
#include "beckman/marginals.hpp"
#include "beckman/mlp.hpp"
#include "beckman/solver.hpp"

namespace beckman {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 0.003;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  // Inputs are replaced by attacks against the current model when set.
  std::optional<AttackConfig> attack = AttackConfig{kDefaultEpsilon, 10, kDefaultEpsilon / 4.0,
                                                    true};
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double clean_accuracy = 0.0;        // on the clean minibatch inputs before each step
  double adversarial_accuracy = 0.0;  // on the inputs actually trained on
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLog> log;
  std::size_t steps = 0;
};

// Minibatch SGD with momentum (v = m v + g; theta -= lr v) on the
// cross-entropy of PGD-perturbed inputs. Throws Error on a non-finite loss.
TrainResult train_adversarial(const LabeledDataset& data, MlpModel model,
                              const TrainConfig& config);

struct FinetuneConfig {
  double learning_rate = 1e-4;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  BarycentricParams barycenter;
  SolverConfig solver;
};

// One epoch of SGD on the barycentric transforms of the clean samples.
TrainResult finetune_barycentric(const MlpModel& model, const LabeledDataset& data,
                                 const FinetuneConfig& config);

// Applies barycentric_transform to every image.
std::vector<ImageTensor> barycentric_batch(const std::vector<ImageTensor>& images,
                                           const BarycentricParams& params,
                                           const SolverConfig& solver);

// Attacks every image against the model; sample i uses derive_seed(seed, i).
std::vector<ImageTensor> attack_batch(const MlpModel& model, const LabeledDataset& data,
                                      const AttackConfig& config, std::uint64_t seed);

struct EvalOptions {
  std::optional<AttackConfig> attack;
  bool barycentric = false;
  BarycentricParams barycenter;
  SolverConfig solver;
  std::uint64_t seed = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  PredictionSet predictions;
  std::vector<std::size_t> predicted;
};

// Attacks always target the raw image; the optional barycentric transform is
// applied to the attacked image before the forward pass.
EvalReport evaluate(const MlpModel& model, const LabeledDataset& data,
                    const EvalOptions& options);

EvalReport classify(const MlpModel& model, const std::vector<ImageTensor>& images,
                    const std::vector<std::size_t>& labels);

// CSV with header f0..f{d-1},label; one row per sample.
void export_features(const MlpModel& model, const LabeledDataset& data,
                     const std::filesystem::path& path);

}  // namespace beckman
