#include "beckman/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "beckman/error.hpp"
#include "beckman/random.hpp"

namespace beckman {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
  return v;
}

void softmax_inplace(std::vector<double>& v) {
  const double peak = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& e : v) {
    e = std::exp(e - peak);
    sum += e;
  }
  for (double& e : v) e /= sum;
}

// Activations per layer; acts[0] is the input, acts.back() the logits.
std::vector<std::vector<double>> run_layers(const MlpModel& model,
                                            std::span<const double> input) {
  if (input.size() != model.input_size()) {
    throw InputError("model expects " + std::to_string(model.input_size()) +
                     " inputs, got " + std::to_string(input.size()));
  }
  std::vector<std::vector<double>> acts;
  acts.emplace_back(input.begin(), input.end());
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto& in = acts.back();
    std::vector<double> out(layer.bias);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = &layer.weights[o * layer.inputs];
      double s = 0.0;
      for (std::size_t i = 0; i < layer.inputs; ++i) s += row[i] * in[i];
      out[o] += s;
    }
    if (l + 1 < layers.size()) {
      for (double& v : out) v = std::max(v, 0.0);
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InputError("a model needs input and output sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw InputError("layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer layer;
    layer.inputs = sizes_[l];
    layer.outputs = sizes_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

MlpModel::MlpModel(std::vector<std::size_t> sizes, std::uint64_t seed)
    : MlpModel(std::move(sizes)) {
  seed_ = seed;
  Rng rng(seed);
  for (auto& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
  }
}

MlpModel MlpModel::zeros(std::vector<std::size_t> sizes) { return MlpModel(std::move(sizes)); }

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void MlpModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw InputError("parameter count mismatch");
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (double& w : layer.weights) w = flat[k++];
    for (double& b : layer.bias) b = flat[k++];
  }
}

bool MlpModel::all_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

ForwardResult forward(const MlpModel& model, std::span<const double> input) {
  auto acts = run_layers(model, input);
  ForwardResult out;
  out.logits = acts.back();
  out.probabilities = out.logits;
  softmax_inplace(out.probabilities);
  out.features = acts[acts.size() - 2];
  return out;
}

ForwardResult forward(const MlpModel& model, const ImageTensor& image) {
  const auto flat = image.flatten();
  return forward(model, flat);
}

Backprop backprop(const MlpModel& model, std::span<const double> input, std::size_t label,
                  bool parameter_grad, bool input_grad) {
  if (label >= model.classes()) throw InputError("label out of range");
  auto acts = run_layers(model, input);
  Backprop out;
  out.probabilities = acts.back();
  {
    const auto& z = acts.back();
    const double peak = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - peak);
    out.loss = peak + std::log(sum) - z[label];
  }
  softmax_inplace(out.probabilities);

  const auto& layers = model.layers();
  if (parameter_grad) out.parameter_grad.assign(model.parameter_count(), 0.0);
  std::vector<std::size_t> offsets(layers.size(), 0);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    offsets[l] = offsets[l - 1] + layers[l - 1].weights.size() + layers[l - 1].bias.size();
  }

  // d loss / d logits = p - onehot(label)
  std::vector<double> delta = out.probabilities;
  delta[label] -= 1.0;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& in = acts[l];
    if (parameter_grad) {
      double* gw = &out.parameter_grad[offsets[l]];
      double* gb = gw + layer.weights.size();
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        if (delta[o] == 0.0) continue;
        for (std::size_t i = 0; i < layer.inputs; ++i) gw[o * layer.inputs + i] = delta[o] * in[i];
        gb[o] = delta[o];
      }
    }
    if (l == 0 && !input_grad) break;
    std::vector<double> back(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      if (delta[o] == 0.0) continue;
      const double* row = &layer.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) back[i] += row[i] * delta[o];
    }
    if (l > 0) {
      // rectifier derivative on the hidden activation
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (in[i] <= 0.0) back[i] = 0.0;
      }
    }
    delta = std::move(back);
  }
  if (input_grad) out.input_grad = std::move(delta);
  return out;
}

ImageTensor grad_input(const MlpModel& model, const ImageTensor& image, std::size_t label) {
  const auto flat = image.flatten();
  Backprop bp = backprop(model, flat, label, false, true);
  std::vector<ScalarField> planes;
  const std::size_t plane = image.height() * image.width();
  for (std::size_t c = 0; c < image.channels(); ++c) {
    planes.emplace_back(image.height(), image.width(),
                        std::vector<double>(bp.input_grad.begin() + c * plane,
                                            bp.input_grad.begin() + (c + 1) * plane));
  }
  return ImageTensor(std::move(planes));
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const auto params = model.parameters();
  out << "beckman-mlp 1\nlayers";
  for (std::size_t s : model.sizes()) out << ' ' << s;
  out << "\nseed " << model.seed() << "\nparameters " << params.size() << "\nend\n";
  for (double v : params) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  auto fail = [&](const std::string& why) { throw IoError(path.string() + ": " + why); };

  std::string line;
  if (!std::getline(in, line) || line != "beckman-mlp 1") fail("not a model checkpoint");
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  bool have_layers = false;
  bool have_count = false;
  while (std::getline(in, line) && line != "end") {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "layers") {
      std::size_t s = 0;
      while (fields >> s) sizes.push_back(s);
      have_layers = true;
    } else if (key == "seed") {
      if (!(fields >> seed)) fail("bad seed line");
    } else if (key == "parameters") {
      if (!(fields >> count)) fail("bad parameter count");
      have_count = true;
    } else {
      fail("unknown header key '" + key + "'");
    }
  }
  if (line != "end" || !have_layers || !have_count) fail("incomplete checkpoint header");

  MlpModel model = [&] {
    try {
      return MlpModel::zeros(sizes);
    } catch (const InputError& e) {
      fail(e.what());
    }
    return MlpModel{};
  }();
  model.set_seed(seed);
  if (count != model.parameter_count()) fail("parameter count does not match the layers");
  std::vector<double> params(count);
  for (double& v : params) {
    char bytes[8];
    if (!in.read(bytes, 8)) fail("truncated parameter block");
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  model.set_parameters(params);
  if (!model.all_finite()) fail("checkpoint holds non-finite parameters");
  return model;
}

}  // namespace beckman
