#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "beckman/image.hpp"

namespace beckman {

// Fully connected network: rectifier on every hidden layer, softmax output.
class MlpModel {
 public:
  struct Layer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> bias;

    friend bool operator==(const Layer&, const Layer&) = default;
  };

  MlpModel() = default;
  // He-uniform initialization from the seed. sizes = {input, hidden..., classes}.
  MlpModel(std::vector<std::size_t> sizes, std::uint64_t seed);
  static MlpModel zeros(std::vector<std::size_t> sizes);

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t classes() const { return sizes_.back(); }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const;
  // Flat layout: for each layer its weights then its bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  bool all_finite() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  explicit MlpModel(std::vector<std::size_t> sizes);

  std::vector<std::size_t> sizes_;
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probabilities;
  // Activations of the last hidden layer (the input when there is none).
  std::vector<double> features;
};

ForwardResult forward(const MlpModel& model, std::span<const double> input);
ForwardResult forward(const MlpModel& model, const ImageTensor& image);

struct Backprop {
  double loss = 0.0;                   // cross-entropy at the label
  std::vector<double> probabilities;
  std::vector<double> parameter_grad;  // empty unless requested
  std::vector<double> input_grad;      // empty unless requested
};

Backprop backprop(const MlpModel& model, std::span<const double> input, std::size_t label,
                  bool parameter_grad, bool input_grad);

// Gradient of the cross-entropy with respect to the image.
ImageTensor grad_input(const MlpModel& model, const ImageTensor& image, std::size_t label);

// Checkpoint: a text header ("beckman-mlp 1", "layers ...", "seed ...",
// "parameters N", "end") followed by N little-endian IEEE-754 doubles.
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace beckman
