#include "beckman/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "beckman/error.hpp"
#include "beckman/random.hpp"

namespace beckman {

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

struct Sgd {
  double learning_rate;
  double momentum;
  std::vector<double> velocity;

  void step(MlpModel& model, const std::vector<double>& grad) {
    auto params = model.parameters();
    if (velocity.empty()) velocity.assign(params.size(), 0.0);
    for (std::size_t j = 0; j < params.size(); ++j) {
      velocity[j] = momentum * velocity[j] + grad[j];
      params[j] -= learning_rate * velocity[j];
    }
    model.set_parameters(params);
  }
};

// Runs one pass over inputs in the given order. make_input returns the sample
// actually trained on for index i.
template <typename MakeInput>
EpochLog run_epoch(MlpModel& model, Sgd& sgd, const LabeledDataset& data,
                   const std::vector<std::size_t>& order, std::size_t batch_size,
                   MakeInput&& make_input, std::size_t& steps) {
  EpochLog log;
  const std::size_t n = order.size();
  std::size_t clean_correct = 0;
  std::size_t used_correct = 0;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    std::vector<double> grad(model.parameter_count(), 0.0);
    for (std::size_t b = start; b < end; ++b) {
      const std::size_t i = order[b];
      const std::size_t label = data.labels[i];
      if (argmax(forward(model, data.images[i]).probabilities) == label) ++clean_correct;
      const ImageTensor input = make_input(model, i);
      const auto flat = input.flatten();
      Backprop bp = backprop(model, flat, label, true, false);
      if (!std::isfinite(bp.loss)) {
        throw Error("training loss became non-finite at step " + std::to_string(steps + 1));
      }
      loss_sum += bp.loss;
      if (argmax(bp.probabilities) == label) ++used_correct;
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += bp.parameter_grad[j];
    }
    const double inv = 1.0 / static_cast<double>(end - start);
    for (double& g : grad) g *= inv;
    sgd.step(model, grad);
    ++steps;
    if (!model.all_finite()) {
      throw Error("model parameters became non-finite at step " + std::to_string(steps));
    }
  }
  if (n > 0) {
    log.mean_loss = loss_sum / static_cast<double>(n);
    log.clean_accuracy = static_cast<double>(clean_correct) / static_cast<double>(n);
    log.adversarial_accuracy = static_cast<double>(used_correct) / static_cast<double>(n);
  }
  return log;
}

}  // namespace

TrainResult train_adversarial(const LabeledDataset& data, MlpModel model,
                              const TrainConfig& config) {
  data.validate();
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  if (config.attack) config.attack->validate();
  TrainResult result;
  Sgd sgd{config.learning_rate, config.momentum, {}};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = shuffled_order(data.size(), derive_seed(config.seed, epoch));
    const std::uint64_t attack_seed = derive_seed(config.seed, 1000 + epoch);
    auto make_input = [&](const MlpModel& m, std::size_t i) {
      if (!config.attack) return data.images[i];
      return attack(m, data.images[i], data.labels[i], *config.attack,
                    derive_seed(attack_seed, i));
    };
    EpochLog log =
        run_epoch(model, sgd, data, order, config.batch_size, make_input, result.steps);
    log.epoch = epoch + 1;
    result.log.push_back(log);
  }
  result.model = std::move(model);
  return result;
}

std::vector<ImageTensor> barycentric_batch(const std::vector<ImageTensor>& images,
                                           const BarycentricParams& params,
                                           const SolverConfig& solver) {
  std::vector<ImageTensor> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(barycentric_transform(img, params, solver));
  return out;
}

std::vector<ImageTensor> attack_batch(const MlpModel& model, const LabeledDataset& data,
                                      const AttackConfig& config, std::uint64_t seed) {
  std::vector<ImageTensor> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.push_back(attack(model, data.images[i], data.labels[i], config, derive_seed(seed, i)));
  }
  return out;
}

TrainResult finetune_barycentric(const MlpModel& model, const LabeledDataset& data,
                                 const FinetuneConfig& config) {
  data.validate();
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  TrainResult result;
  result.model = model;
  if (data.size() == 0) return result;

  const auto bary = barycentric_batch(data.images, config.barycenter, config.solver);
  Sgd sgd{config.learning_rate, config.momentum, {}};
  const auto order = shuffled_order(data.size(), derive_seed(config.seed, 0));
  auto make_input = [&](const MlpModel&, std::size_t i) { return bary[i]; };
  EpochLog log = run_epoch(result.model, sgd, data, order, config.batch_size, make_input,
                           result.steps);
  log.epoch = 1;
  result.log.push_back(log);
  return result;
}

EvalReport classify(const MlpModel& model, const std::vector<ImageTensor>& images,
                    const std::vector<std::size_t>& labels) {
  if (images.size() != labels.size()) throw InputError("image and label counts differ");
  EvalReport report;
  report.total = images.size();
  std::vector<double> flat;
  flat.reserve(images.size() * model.classes());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto out = forward(model, images[i]);
    const std::size_t p = argmax(out.probabilities);
    report.predicted.push_back(p);
    if (p == labels[i]) ++report.correct;
    flat.insert(flat.end(), out.probabilities.begin(), out.probabilities.end());
  }
  if (!images.empty()) report.predictions = PredictionSet(model.classes(), std::move(flat));
  report.accuracy = report.total > 0 ? static_cast<double>(report.correct) /
                                           static_cast<double>(report.total)
                                     : 0.0;
  return report;
}

EvalReport evaluate(const MlpModel& model, const LabeledDataset& data,
                    const EvalOptions& options) {
  data.validate();
  std::vector<ImageTensor> inputs =
      options.attack ? attack_batch(model, data, *options.attack, options.seed) : data.images;
  if (options.barycentric) {
    inputs = barycentric_batch(inputs, options.barycenter, options.solver);
  }
  return classify(model, inputs, data.labels);
}

void export_features(const MlpModel& model, const LabeledDataset& data,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const auto& sizes = model.sizes();
  const std::size_t dim = sizes[sizes.size() - 2];
  for (std::size_t j = 0; j < dim; ++j) out << 'f' << j << ',';
  out << "label\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = forward(model, data.images[i]).features;
    for (double v : f) out << v << ',';
    out << data.labels[i] << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace beckman
