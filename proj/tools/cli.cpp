#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "beckman/attack.hpp"
#include "beckman/dataset.hpp"
#include "beckman/error.hpp"
#include "beckman/grid.hpp"
#include "beckman/image.hpp"
#include "beckman/info.hpp"
#include "beckman/marginals.hpp"
#include "beckman/mlp.hpp"
#include "beckman/pipeline.hpp"
#include "beckman/random.hpp"
#include "beckman/solver.hpp"
#include "demo.hpp"

namespace beckman::cli {

namespace fs = std::filesystem;

namespace {

void add_solver_flags(CLI::App* cmd, SolverConfig& solver) {
  cmd->add_option("--tau1", solver.tau1, "primal step size")->capture_default_str();
  cmd->add_option("--tau2", solver.tau2, "dual step size")->capture_default_str();
  cmd->add_option("--iters", solver.iterations, "solver iterations")->capture_default_str();
}

void add_barycenter_flags(CLI::App* cmd, BarycentricParams& params, SolverConfig& solver) {
  cmd->add_option("--theta", params.theta, "marginal rotation in degrees")->capture_default_str();
  cmd->add_option("--alpha", params.alpha, "slack weight")->capture_default_str();
  cmd->add_option("--beta", params.beta, "barycenter mass weight")->capture_default_str();
  cmd->add_option("--rho", params.rho, "marginal relaxation weight")->capture_default_str();
  cmd->add_option("--scale", params.intensity_scale, "solver units per intensity unit")
      ->capture_default_str();
  add_solver_flags(cmd, solver);
}

DensityGrid read_density(const fs::path& path) {
  const ImageTensor img = read_pnm(path);
  if (img.channels() != 1) throw InputError(path.string() + ": expected a grayscale PGM");
  return DensityGrid(img.channel(0));
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << std::setprecision(17);
  return out;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

struct DistanceArgs {
  std::string in1, in2, trace;
  // The balanced solve has no mass-creation shortcut and needs more
  // iterations than the barycenter default.
  SolverConfig solver{.iterations = 2000};
};

void cmd_distance(const DistanceArgs& a, std::ostream& out, std::ostream& err) {
  const DensityGrid mu1 = read_density(a.in1);
  const DensityGrid mu2 = read_density(a.in2);
  if (mu1.height() != mu2.height() || mu1.width() != mu2.width()) {
    throw InputError(a.in2 + ": dimensions differ from " + a.in1);
  }
  SolverConfig cfg = a.solver;
  if (!a.trace.empty()) cfg.trace_every = 1;
  const DistanceResult r = solve_distance(mu1, mu2, cfg);
  print_warnings(err, r.trace.warnings);
  out << std::setprecision(10) << r.value << '\n';
  if (!a.trace.empty()) {
    auto f = open_out(a.trace);
    write_trace_csv(f, r.trace, false);
  }
}

struct BarycenterArgs {
  std::string in, out;
  std::uint64_t seed = 0;
  BarycentricParams params;
  SolverConfig solver;
};

void cmd_barycenter(const BarycenterArgs& a, std::ostream& out, std::ostream& err) {
  const ImageTensor img = read_pnm(a.in);
  std::vector<ChannelSolve> diag;
  const ImageTensor result = barycentric_transform(img, a.params, a.solver, &diag);
  std::vector<std::string> warnings;
  for (const auto& d : diag) {
    for (const auto& w : d.trace.warnings) {
      if (warnings.empty() || warnings.back() != w) warnings.push_back(w);
    }
  }
  print_warnings(err, warnings);
  write_pnm(a.out, result);
  out << "wrote " << a.out << " (" << img.channels() << "x" << img.height() << "x"
      << img.width() << ")\n";
}

struct DefendArgs {
  std::string data, checkpoint, out, features, log;
  std::size_t epochs = 5;
  std::size_t steps = 10;
  std::size_t count = 512;
  std::size_t batch = 32;
  std::optional<double> lr;
  double eps = kDefaultEpsilon;
  std::uint64_t seed = 0;
  bool barycentric = true;
  std::vector<std::size_t> hidden{32};
  BarycentricParams params;
  SolverConfig solver;
};

void cmd_make_data(const DefendArgs& a, std::ostream& out) {
  write_dataset(a.out, make_toy_digits(a.count, a.seed));
  out << "wrote " << a.count << " samples to " << a.out << '\n';
}

void cmd_pretrain(const DefendArgs& a, std::ostream& out) {
  const LabeledDataset data = read_dataset(a.data);
  if (data.size() == 0) throw InputError(a.data + ": dataset is empty");
  std::vector<std::size_t> sizes{data.images[0].size()};
  sizes.insert(sizes.end(), a.hidden.begin(), a.hidden.end());
  sizes.push_back(data.classes);
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  if (a.lr) cfg.learning_rate = *a.lr;
  cfg.seed = derive_seed(a.seed, 1);
  cfg.attack = AttackConfig{a.eps, a.steps, a.eps / 4.0, true};
  if (a.eps == 0.0) cfg.attack->step_size = 0.0;
  const TrainResult r = train_adversarial(data, MlpModel(sizes, derive_seed(a.seed, 0)), cfg);
  std::ofstream log;
  if (!a.log.empty()) {
    log = open_out(a.log);
    log << "epoch,mean_loss,clean_accuracy,adversarial_accuracy\n";
  }
  out << "epoch,mean_loss,clean_accuracy,adversarial_accuracy\n" << std::setprecision(6);
  for (const auto& e : r.log) {
    out << e.epoch << ',' << e.mean_loss << ',' << e.clean_accuracy << ','
        << e.adversarial_accuracy << '\n';
    if (log) {
      log << e.epoch << ',' << e.mean_loss << ',' << e.clean_accuracy << ','
          << e.adversarial_accuracy << '\n';
    }
  }
  out << "steps " << r.steps << '\n';
  save_checkpoint(a.out, r.model);
  out << "wrote " << a.out << '\n';
}

void cmd_finetune(const DefendArgs& a, std::ostream& out) {
  const LabeledDataset data = read_dataset(a.data);
  const MlpModel model = load_checkpoint(a.checkpoint);
  FinetuneConfig cfg;
  cfg.batch_size = a.batch;
  if (a.lr) cfg.learning_rate = *a.lr;
  cfg.seed = derive_seed(a.seed, 2);
  cfg.barycenter = a.params;
  cfg.solver = a.solver;
  const TrainResult r = finetune_barycentric(model, data, cfg);
  if (!r.log.empty()) {
    out << std::setprecision(6) << "mean_loss " << r.log[0].mean_loss << '\n';
  }
  out << "steps " << r.steps << '\n';
  save_checkpoint(a.out, r.model);
  out << "wrote " << a.out << '\n';
}

void cmd_eval(const DefendArgs& a, std::ostream& out) {
  const LabeledDataset data = read_dataset(a.data);
  const MlpModel model = load_checkpoint(a.checkpoint);
  struct Attack {
    std::string name;
    std::optional<AttackConfig> config;
  };
  std::vector<Attack> attacks{{"clean", std::nullopt},
                              {"fgsm", AttackConfig::fgsm(a.eps)},
                              {"pgd10", AttackConfig::pgd(10, a.eps)},
                              {"pgd20", AttackConfig::pgd(20, a.eps)}};
  const fs::path dir = a.out;
  fs::create_directories(dir);
  auto report = open_out(dir / "report.csv");
  report << "attack,barycentric,accuracy,correct,total\n";
  out << "attack,barycentric,accuracy,correct,total\n" << std::setprecision(6);

  std::vector<int> modes{0};
  if (a.barycentric) modes.push_back(1);
  std::vector<std::vector<PredictionSet>> preds(modes.size());
  for (std::size_t k = 0; k < attacks.size(); ++k) {
    // Attacked images are shared between the raw and barycentric rows.
    const std::uint64_t seed = derive_seed(a.seed, 100 + k);
    std::vector<ImageTensor> inputs =
        attacks[k].config ? attack_batch(model, data, *attacks[k].config, seed) : data.images;
    for (int mode : modes) {
      const EvalReport r =
          classify(model, mode ? barycentric_batch(inputs, a.params, a.solver) : inputs,
                   data.labels);
      const std::string suffix = mode ? "_barycentric" : "";
      report << attacks[k].name << ',' << mode << ',' << r.accuracy << ',' << r.correct << ','
             << r.total << '\n';
      out << attacks[k].name << ',' << mode << ',' << r.accuracy << ',' << r.correct << ','
          << r.total << '\n';
      auto f = open_out(dir / ("predictions_" + attacks[k].name + suffix + ".csv"));
      write_predictions_csv(f, r.predictions);
      preds[mode].push_back(r.predictions);
    }
  }

  auto mi = open_out(dir / "mi.csv");
  mi << "attack,barycentric,mi_pairwise_with_clean,mi_param_output\n";
  for (int mode : modes) {
    for (std::size_t k = 0; k < attacks.size(); ++k) {
      if (data.size() == 0) continue;
      mi << attacks[k].name << ',' << mode << ','
         << mi_pairwise(preds[mode][0], preds[mode][k]) << ','
         << mi_param_output(preds[mode][k]) << '\n';
    }
  }
  if (!a.features.empty()) export_features(model, data, a.features);
  out << "wrote " << dir.string() << '\n';
}

void cmd_mi(const std::string& a, const std::string& b, std::ostream& out) {
  const PredictionSet pa = read_predictions_csv(a);
  out << std::setprecision(10);
  if (b.empty()) {
    out << mi_param_output(pa) << '\n';
  } else {
    out << mi_pairwise(pa, read_predictions_csv(b)) << '\n';
  }
}

void cmd_demo(const DemoOptions& options, const std::string& dir, std::ostream& out,
              std::ostream& err) {
  const DemoResult r = run_gaussian_demo(options);
  print_warnings(err, r.warnings);
  write_demo(dir, r);
  out << "variant,psnr_input,psnr_barycenter,relative_l2\n" << std::setprecision(6);
  for (const auto& row : r.rows) {
    out << row.variant << ',' << row.psnr_input << ',' << row.psnr_barycenter << ','
        << row.relative_error << '\n';
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unbalanced transport barycenters as an adversarial-input defense", "beckman"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);

  DistanceArgs dist;
  auto* distance = app.add_subcommand("distance", "transport distance between two PGM images");
  distance->add_option("in1", dist.in1)->required();
  distance->add_option("in2", dist.in2)->required();
  distance->add_option("--trace", dist.trace, "write iteration,objective,residual CSV");
  add_solver_flags(distance, dist.solver);

  BarycenterArgs bary;
  auto* barycenter = app.add_subcommand("barycenter", "barycentric transform of a PGM/PPM image");
  barycenter->add_option("in", bary.in)->required();
  barycenter->add_option("out", bary.out)->required();
  barycenter->add_option("--seed", bary.seed, "accepted for uniformity; the solver is deterministic");
  add_barycenter_flags(barycenter, bary.params, bary.solver);

  DefendArgs def;
  auto* defend = app.add_subcommand("defend", "toy adversarial defense pipeline");
  defend->require_subcommand(1);
  auto* make_data = defend->add_subcommand("make-data", "write the synthetic toy digit set");
  make_data->add_option("--out", def.out)->required();
  make_data->add_option("--count", def.count)->capture_default_str();
  make_data->add_option("--seed", def.seed)->capture_default_str();

  auto* pretrain = defend->add_subcommand("pretrain", "PGD adversarial training from scratch");
  pretrain->add_option("--data", def.data)->required();
  pretrain->add_option("--checkpoint,--out", def.out, "checkpoint to write")->required();
  pretrain->add_option("--epochs", def.epochs)->capture_default_str();
  pretrain->add_option("--eps", def.eps)->capture_default_str();
  pretrain->add_option("--steps", def.steps, "PGD steps per sample")->capture_default_str();
  pretrain->add_option("--seed", def.seed)->capture_default_str();
  pretrain->add_option("--lr", def.lr, "learning rate");
  pretrain->add_option("--batch", def.batch)->capture_default_str();
  pretrain->add_option("--hidden", def.hidden, "hidden layer widths")->capture_default_str();
  pretrain->add_option("--log", def.log, "write the epoch log CSV");

  auto* finetune = defend->add_subcommand("finetune", "one epoch on barycentric transforms");
  finetune->add_option("--data", def.data)->required();
  finetune->add_option("--checkpoint", def.checkpoint, "checkpoint to start from")->required();
  finetune->add_option("--out", def.out, "checkpoint to write")->required();
  finetune->add_option("--seed", def.seed)->capture_default_str();
  finetune->add_option("--lr", def.lr, "learning rate");
  finetune->add_option("--batch", def.batch)->capture_default_str();
  add_barycenter_flags(finetune, def.params, def.solver);

  auto* eval = defend->add_subcommand("eval", "accuracy under attack with and without the defense");
  eval->add_option("--data", def.data)->required();
  eval->add_option("--checkpoint", def.checkpoint)->required();
  eval->add_option("--out", def.out, "report directory")->required();
  eval->add_option("--eps", def.eps)->capture_default_str();
  eval->add_option("--seed", def.seed)->capture_default_str();
  eval->add_flag("--barycentric,!--no-barycentric", def.barycentric,
                 "also evaluate with barycentric inference")
      ->capture_default_str();
  eval->add_option("--features", def.features, "write penultimate features CSV");
  add_barycenter_flags(eval, def.params, def.solver);

  std::string mi_a, mi_b;
  auto* mi = app.add_subcommand("mi", "mutual information of prediction CSVs");
  mi->add_option("a", mi_a)->required();
  mi->add_option("b", mi_b);

  DemoOptions demo_opts;
  std::string demo_noise = "all";
  std::string demo_out;
  auto* demo = app.add_subcommand("demo-gaussian", "barycenters of a clean, noisy and attacked Gaussian");
  demo->add_option("--noise", demo_noise)
      ->check(CLI::IsMember({"none", "uniform", "fgsm", "all"}))
      ->capture_default_str();
  demo->add_option("--out", demo_out)->required();
  demo->add_option("--seed", demo_opts.seed)->capture_default_str();
  demo->add_option("--size", demo_opts.size)->capture_default_str();
  demo->add_option("--sigma", demo_opts.sigma)->capture_default_str();
  demo->add_option("--eps", demo_opts.epsilon)->capture_default_str();
  add_barycenter_flags(demo, demo_opts.barycenter, demo_opts.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (distance->parsed()) {
      cmd_distance(dist, out, err);
    } else if (barycenter->parsed()) {
      cmd_barycenter(bary, out, err);
    } else if (make_data->parsed()) {
      cmd_make_data(def, out);
    } else if (pretrain->parsed()) {
      cmd_pretrain(def, out);
    } else if (finetune->parsed()) {
      cmd_finetune(def, out);
    } else if (eval->parsed()) {
      cmd_eval(def, out);
    } else if (mi->parsed()) {
      cmd_mi(mi_a, mi_b, out);
    } else if (demo->parsed()) {
      demo_opts.noise = parse_demo_noise(demo_noise);
      cmd_demo(demo_opts, demo_out, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace beckman::cli
