#include "demo.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "beckman/attack.hpp"
#include "beckman/error.hpp"
#include "beckman/pipeline.hpp"
#include "beckman/random.hpp"

namespace beckman::cli {

namespace {

ImageTensor blob(std::size_t size, double sy, double sx, double dy, double dx) {
  ImageTensor img(1, size, size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double ry = (static_cast<double>(y) - c - dy) / sy;
      const double rx = (static_cast<double>(x) - c - dx) / sx;
      img.channel(0)(y, x) = std::exp(-0.5 * (rx * rx + ry * ry));
    }
  }
  return img;
}

DemoRow make_row(std::string variant, ImageTensor input, const ImageTensor& clean,
                 const DemoOptions& options, std::vector<std::string>& warnings) {
  DemoRow row;
  row.variant = std::move(variant);
  std::vector<ChannelSolve> diag;
  row.barycenter = barycentric_transform(input, options.barycenter, options.solver, &diag);
  for (const auto& d : diag) {
    for (const auto& w : d.trace.warnings) {
      if (warnings.empty() || warnings.back() != w) warnings.push_back(w);
    }
  }
  row.input = std::move(input);
  row.psnr_input = psnr(row.input, clean);
  row.psnr_barycenter = psnr(row.barycenter, clean);
  row.relative_error = relative_l2_error(row.barycenter, clean);
  return row;
}

}  // namespace

DemoNoise parse_demo_noise(const std::string& name) {
  if (name == "none") return DemoNoise::kNone;
  if (name == "uniform") return DemoNoise::kUniform;
  if (name == "fgsm") return DemoNoise::kFgsm;
  if (name == "all") return DemoNoise::kAll;
  throw ConfigError("unknown noise kind '" + name + "' (expected none, uniform, fgsm or all)");
}

MlpModel train_blob_model(std::size_t size, std::uint64_t seed) {
  LabeledDataset data;
  Rng rng(derive_seed(seed, 1));
  for (std::size_t i = 0; i < 64; ++i) {
    const std::size_t label = i % 2;
    const double s = rng.uniform(5.0, 10.0);
    const double stretch = label == 0 ? 1.0 : rng.uniform(1.6, 2.4);
    const bool vertical = rng.uniform() < 0.5;
    const double dy = rng.uniform(-3.0, 3.0);
    const double dx = rng.uniform(-3.0, 3.0);
    data.images.push_back(vertical ? blob(size, s * stretch, s, dy, dx)
                                   : blob(size, s, s * stretch, dy, dx));
    data.labels.push_back(label);
  }
  TrainConfig cfg;
  cfg.attack.reset();
  cfg.epochs = 10;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.01;
  cfg.seed = derive_seed(seed, 2);
  return train_adversarial(data, MlpModel({size * size, 16, 2}, derive_seed(seed, 3)), cfg)
      .model;
}

DemoResult run_gaussian_demo(const DemoOptions& options) {
  options.barycenter.validate();
  options.solver.validate();
  DemoResult result;
  result.clean = gaussian_image(options.size, options.size, options.sigma);
  const ImageTensor& clean = result.clean;
  result.rows.push_back(make_row("clean", clean, clean, options, result.warnings));

  const bool all = options.noise == DemoNoise::kAll;
  if (all || options.noise == DemoNoise::kUniform) {
    ImageTensor noisy = clean;
    Rng rng(derive_seed(options.seed, 10));
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      noisy[i] += rng.uniform(-options.uniform_amplitude, options.uniform_amplitude);
    }
    noisy.clamp01();
    result.rows.push_back(make_row("uniform", std::move(noisy), clean, options, result.warnings));
  }
  if (all || options.noise == DemoNoise::kFgsm) {
    const MlpModel model = train_blob_model(options.size, options.seed);
    ImageTensor adv = attack_fgsm(model, clean, 0, AttackConfig::fgsm(options.epsilon));
    result.rows.push_back(make_row("fgsm", std::move(adv), clean, options, result.warnings));
  }
  return result;
}

void write_demo(const std::filesystem::path& dir, const DemoResult& result) {
  std::filesystem::create_directories(dir);
  for (const auto& row : result.rows) {
    write_pnm(dir / (row.variant + ".pgm"), row.input);
    write_pnm(dir / (row.variant + "_barycenter.pgm"), row.barycenter);
  }
  const auto path = dir / "psnr.csv";
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "variant,psnr_input,psnr_barycenter,relative_l2\n" << std::setprecision(17);
  for (const auto& row : result.rows) {
    out << row.variant << ',' << row.psnr_input << ',' << row.psnr_barycenter << ','
        << row.relative_error << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace beckman::cli
