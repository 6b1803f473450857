// One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "beckman/attack.hpp"
#include "beckman/dataset.hpp"
#include "beckman/grid.hpp"
#include "beckman/image.hpp"
#include "beckman/info.hpp"
#include "beckman/marginals.hpp"
#include "beckman/mlp.hpp"
#include "beckman/oracle.hpp"
#include "beckman/pipeline.hpp"
#include "beckman/prox.hpp"
#include "beckman/solver.hpp"
#include "cli.hpp"
#include "demo.hpp"
#include "test_util.hpp"

using namespace beckman;
using beckman::testing::random_density;
using beckman::testing::random_field;
using beckman::testing::random_flux;
using beckman::testing::read_file;
using beckman::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks; the first few are kept for the report line.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_ < 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    ++failures_;
  }
  void note(const std::string& what) { info_ += (info_.empty() ? "" : ", ") + what; }
  Outcome outcome() const {
    std::string d = info_;
    if (failures_ > 0) {
      d += (d.empty() ? "" : " | ") + std::to_string(failures_) + " failed: " + notes_;
    }
    return {failures_ == 0, d};
  }

 private:
  int failures_ = 0;
  std::string notes_;
  std::string info_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

SolverConfig steps(double tau1, double tau2, std::size_t iterations) {
  SolverConfig c;
  c.tau1 = tau1;
  c.tau2 = tau2;
  c.iterations = iterations;
  return c;
}

ScalarField one(double v) { return ScalarField(1, 1, v); }

Outcome adjoint_identity() {
  Checker c;
  Rng rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 2 + rng.below(31);
    const std::size_t w = 2 + rng.below(31);
    const FluxField m = random_flux(rng, h, w);
    const ScalarField lambda = random_field(rng, h, w);
    const double gap = std::abs(dot(divergence(m), lambda) - dot(m, divergence_adjoint(lambda)));
    const double bound = 1e-10 * (std::sqrt(dot(m, m)) * lambda.l2_norm() + 1.0);
    worst = std::max(worst, gap / bound);
    c.expect(gap <= bound, std::to_string(h) + "x" + std::to_string(w));
  }
  c.note("worst gap/bound " + fmt(worst));
  return c.outcome();
}

Outcome shrink_analytics() {
  Checker c;
  c.expect(std::abs(shrink_l1(one(2.0), 1.0)[0] - 1.0) <= 1e-12, "l1(2)");
  c.expect(shrink_l1(one(-0.5), 1.0)[0] == 0.0, "l1(-0.5)");
  c.expect(std::abs(shrink_l1(one(-3.0), 1.0)[0] + 2.0) <= 1e-12, "l1(-3)");
  const FluxField a = shrink_l21(FluxField(one(3.0), one(4.0)), 1.0);
  c.expect(std::abs(a.x[0] - 2.4) <= 1e-12 && std::abs(a.y[0] - 3.2) <= 1e-12, "l21(3,4)");
  const FluxField b = shrink_l21(FluxField(one(0.3), one(0.4)), 1.0);
  c.expect(b.x[0] == 0.0 && b.y[0] == 0.0, "l21(0.3,0.4)");
  const FluxField z = shrink_l21(FluxField(one(0.0), one(0.0)), 1.0);
  c.expect(z.x[0] == 0.0 && z.y[0] == 0.0, "l21(0,0)");

  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = rng.uniform(0.01, 2.0);
    const ScalarField x = random_field(rng, 4, 4, -3.0, 3.0);
    const ScalarField y = random_field(rng, 4, 4, -3.0, 3.0);
    c.expect((shrink_l1(x, t) - shrink_l1(y, t)).l2_norm() <= (x - y).l2_norm() + 1e-12,
             "l1 pair " + std::to_string(trial));
    const FluxField u = random_flux(rng, 4, 4);
    const FluxField v = random_flux(rng, 4, 4);
    const FluxField su = shrink_l21(u, t);
    const FluxField sv = shrink_l21(v, t);
    for (std::size_t i = 0; i < u.x.size(); ++i) {
      c.expect(std::hypot(su.x[i] - sv.x[i], su.y[i] - sv.y[i]) <=
                   std::hypot(u.x[i] - v.x[i], u.y[i] - v.y[i]) + 1e-12,
               "l21 pair " + std::to_string(trial));
    }
  }
  return c.outcome();
}

Outcome step_size_condition() {
  Checker c;
  const SolverConfig defaults;
  const StepSizeReport tiny = check_step_sizes(defaults, 1, 2);
  c.expect(std::abs(tiny.lambda_max - (3.0 + std::sqrt(5.0)) / 2.0) <= 1e-6, "1x2 eig");
  const StepSizeReport big = check_step_sizes(defaults, 64, 64);
  c.expect(big.lambda_max > 7.9 && big.lambda_max < 8.0, "64x64 eig");
  c.expect(std::abs(big.product - 1.099) <= 1e-3 && !big.satisfied, "default product");

  BarycenterProblem p;
  p.marginals = {DensityGrid(ScalarField(64, 64, 1e-3)), DensityGrid(ScalarField(64, 64, 1e-3))};
  c.expect(!solve_barycenter(p, steps(0.1, 1.0, 1)).trace.warnings.empty(), "no warning");
  const StepSizeReport ok = check_step_sizes(steps(0.09, 1.0, 200), 64, 64);
  c.expect(ok.satisfied, "tau1 0.09");
  c.expect(solve_barycenter(p, steps(0.09, 1.0, 1)).trace.warnings.empty(), "0.09 warned");
  c.note("lambda 1x2 " + fmt(tiny.lambda_max, 8) + ", 64x64 " + fmt(big.lambda_max, 6) +
         ", product " + fmt(big.product) + " vs " + fmt(ok.product));
  return c.outcome();
}

Outcome oracle_equivalence() {
  Checker c;
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const DensityGrid a = random_density(rng, 1, 32);
    const DensityGrid b = random_density(rng, 1, 32);
    const double ref = emd_1d(a, b);
    const double got = solve_distance(a, b, steps(0.003, 80.0, 5000)).value;
    const double rel = std::abs(got - ref) / ref;
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-3, "pair " + std::to_string(trial) + " rel " + fmt(rel));
  }
  c.note("worst relative error " + fmt(worst));
  return c.outcome();
}

Outcome barycenter_correctness() {
  Checker c;
  const SolverConfig cfg = steps(0.05, 1.0, 2000);
  Rng rng(4);
  const DensityGrid mu(random_field(rng, 5, 5, 0.0, 1.0));
  BarycenterProblem same;
  same.marginals = {mu, mu};
  same.rho = 1e4;
  const double keep = (solve_barycenter(same, cfg).barycenter - mu.field()).max_abs();
  c.expect(keep <= 1e-2, "beta < 2 alpha: " + fmt(keep));
  same.beta = 4.0;
  const double vanish = solve_barycenter(same, cfg).barycenter.max_abs();
  c.expect(vanish <= 1e-2, "beta > 2 alpha: " + fmt(vanish));
  c.note("linf keep " + fmt(keep) + " vanish " + fmt(vanish));

  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t h = 3 + rng.below(6);
    const std::size_t w = 3 + rng.below(6);
    BarycenterProblem p;
    p.marginals = {random_density(rng, h, w, 2.0), random_density(rng, h, w, 2.0)};
    p.rho = 1e4;
    const double pd = objective_value(solve_barycenter(p, steps(0.05, 1.0, 5000)).state, p);
    const double oracle = subgradient_barycenter(p).objective;
    const double gap = std::abs(pd - oracle);
    worst = std::max(worst, gap);
    c.expect(gap <= 1e-2, std::to_string(h) + "x" + std::to_string(w) + " pd " + fmt(pd, 6) +
                              " oracle " + fmt(oracle, 6));
  }
  c.note("worst objective gap " + fmt(worst));
  return c.outcome();
}

Outcome convergence_rate() {
  Checker c;
  Rng rng(5);
  BarycenterProblem p;
  p.marginals = {random_density(rng, 16, 16, 4.0), random_density(rng, 16, 16, 4.0)};
  SolverConfig cfg = steps(0.05, 1.0, 1000);
  cfg.trace_every = 1;
  const BarycenterResult r = solve_barycenter(p, cfg);
  c.expect(r.trace.step.satisfied && r.trace.step.coupled_product < 1.0, "step sizes invalid");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& rec : r.trace.records) {
    if (rec.iteration < 10) continue;
    const double x = std::log(static_cast<double>(rec.iteration));
    const double y = std::log(rec.average_residual);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  c.expect(slope <= -0.8, "slope " + fmt(slope));
  c.note("slope " + fmt(slope));
  return c.outcome();
}

Outcome gaussian_demo() {
  Checker c;
  const cli::DemoResult r = cli::run_gaussian_demo(cli::DemoOptions{});
  for (const auto& row : r.rows) {
    c.note(row.variant + " " + fmt(row.psnr_input) + "->" + fmt(row.psnr_barycenter) + " dB");
    if (row.variant == "clean") {
      c.expect(row.relative_error <= 0.15, "clean error " + fmt(row.relative_error));
    } else {
      c.expect(row.psnr_barycenter > row.psnr_input, row.variant + " not improved");
    }
  }
  c.expect(r.rows.size() == 3, "missing rows");
  return c.outcome();
}

PredictionSet one_hot(const std::vector<std::size_t>& labels) {
  std::vector<double> flat;
  for (std::size_t l : labels) {
    flat.push_back(l == 0);
    flat.push_back(l == 1);
  }
  return PredictionSet(2, flat);
}

Outcome mi_diagnostics() {
  Checker c;
  const PredictionSet labels = one_hot({0, 1, 0, 1, 1, 0});
  c.expect(std::abs(mi_pairwise(labels, labels) - std::log(2.0)) <= 1e-4, "ln 2");
  const PredictionSet flat(2, std::vector<double>(12, 0.5));
  c.expect(std::abs(mi_pairwise(labels, flat)) <= 1e-9, "independence");
  const double hand = mi_pairwise(one_hot({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}),
                                  one_hot({0, 0, 0, 0, 1, 0, 1, 1, 1, 1}));
  c.expect(std::abs(hand - 0.1927) <= 1e-4, "hand fixture " + fmt(hand));
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t classes = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(40);
    std::vector<double> fa, fb;
    for (auto* f : {&fa, &fb}) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(classes);
        double s = 0.0;
        for (double& v : row) s += (v = rng.uniform() + 1e-9);
        for (double v : row) f->push_back(v / s);
      }
    }
    const double v = mi_pairwise(PredictionSet(classes, fa), PredictionSet(classes, fb));
    c.expect(v >= 0.0 && v <= std::log(static_cast<double>(classes)), "bounds " + fmt(v));
  }
  return c.outcome();
}

Outcome gradient_check() {
  Checker c;
  const MlpModel model({784, 32, 2}, 8);
  const LabeledDataset data = make_toy_digits(4, 8);
  Rng rng(8);
  double worst = 0.0;
  const double h = 1e-6;
  auto loss = [](const MlpModel& m, const std::vector<double>& x, std::size_t y) {
    return backprop(m, x, y, false, false).loss;
  };
  auto compare = [&](double analytic, double numeric, const std::string& what) {
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-5, what + " rel " + fmt(rel));
  };
  const auto theta = model.parameters();
  for (int k = 0; k < 100; ++k) {
    const std::size_t s = rng.below(data.size());
    const auto x = data.images[s].flatten();
    const std::size_t y = data.labels[s];
    const Backprop bp = backprop(model, x, y, true, true);
    if (k % 2 == 0) {
      const std::size_t j = rng.below(x.size());
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      compare(bp.input_grad[j], (loss(model, xp, y) - loss(model, xm, y)) / (2 * h),
              "input " + std::to_string(j));
    } else {
      const std::size_t j = rng.below(theta.size());
      MlpModel mp = model, mm = model;
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      mp.set_parameters(tp);
      mm.set_parameters(tm);
      compare(bp.parameter_grad[j], (loss(mp, x, y) - loss(mm, x, y)) / (2 * h),
              "parameter " + std::to_string(j));
    }
  }
  c.note("worst relative error " + fmt(worst));
  return c.outcome();
}

Outcome defense_pipeline() {
  Checker c;
  const LabeledDataset train = make_toy_digits(512, 1);
  const LabeledDataset test = make_toy_digits(256, 2);
  TrainConfig tc;
  tc.seed = 3;
  const MlpModel pre = train_adversarial(train, MlpModel({784, 32, 2}, 7), tc).model;
  FinetuneConfig fc;
  fc.seed = 4;
  const MlpModel model = finetune_barycentric(pre, train, fc).model;

  const BarycentricParams params;
  const SolverConfig solver;
  const auto fgsm_images = attack_batch(model, test, AttackConfig::fgsm(), 11);
  const auto pgd_images = attack_batch(model, test, AttackConfig::pgd(10), 12);
  const EvalReport clean = classify(model, test.images, test.labels);
  const EvalReport clean_bary =
      classify(model, barycentric_batch(test.images, params, solver), test.labels);
  const EvalReport fgsm = classify(model, fgsm_images, test.labels);
  const EvalReport fgsm_bary =
      classify(model, barycentric_batch(fgsm_images, params, solver), test.labels);
  const EvalReport pgd = classify(model, pgd_images, test.labels);

  const double gain = fgsm_bary.accuracy - fgsm.accuracy;
  c.expect(gain >= 0.05, "(a) gain " + fmt(gain));
  c.expect(pgd.accuracy <= fgsm.accuracy, "(b) pgd " + fmt(pgd.accuracy));
  const double mi_raw = mi_pairwise(clean.predictions, fgsm.predictions);
  const double mi_bary = mi_pairwise(clean_bary.predictions, fgsm_bary.predictions);
  c.expect(mi_bary > mi_raw, "(c) mi");
  c.note("clean " + fmt(clean.accuracy, 3) + ", fgsm " + fmt(fgsm.accuracy, 3) +
         ", fgsm+bary " + fmt(fgsm_bary.accuracy, 3) + ", pgd10 " + fmt(pgd.accuracy, 3) +
         ", mi raw " + fmt(mi_raw, 3) + " bary " + fmt(mi_bary, 3));
  return c.outcome();
}

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "beckman");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  Checker c;
  TempDir dir("accept_det");
  const std::string data_dir = BECKMAN_DATA_DIR;
  const std::string gaussian = data_dir + "/gaussian.pgm";
  std::vector<std::string> csvs;
  for (int pass = 0; pass < 2; ++pass) {
    const std::string root = (dir / ("run" + std::to_string(pass))).string();
    const std::string data = root + "/data";
    const std::string pre = root + "/pre.bin";
    const std::string ft = root + "/ft.bin";
    int status = 0;
    status |= cli_run({"distance", gaussian, gaussian, "--iters", "30", "--trace",
                       root + "/trace.csv"});
    status |= cli_run({"barycenter", gaussian, root + "/bary.pgm"});
    status |= cli_run({"defend", "make-data", "--out", data, "--count", "64", "--seed", "5"});
    status |= cli_run({"defend", "pretrain", "--data", data, "--checkpoint", pre, "--epochs",
                       "2", "--seed", "5", "--log", root + "/log.csv"});
    status |= cli_run({"defend", "finetune", "--data", data, "--checkpoint", pre, "--out", ft,
                       "--seed", "5"});
    status |= cli_run({"defend", "eval", "--data", data, "--checkpoint", ft, "--out",
                       root + "/eval", "--seed", "5", "--features", root + "/features.csv"});
    status |= cli_run({"demo-gaussian", "--out", root + "/demo", "--seed", "5"});
    c.expect(status == 0, "a command failed");
  }
  const std::vector<std::string> files = {
      "trace.csv", "log.csv", "features.csv", "data/labels.csv", "eval/report.csv",
      "eval/mi.csv", "eval/predictions_clean.csv", "eval/predictions_fgsm_barycentric.csv",
      "eval/predictions_pgd10.csv", "eval/predictions_pgd20_barycentric.csv", "demo/psnr.csv",
      "bary.pgm", "ft.bin"};
  for (const auto& f : files) {
    const std::string a = read_file(dir / "run0" / f);
    c.expect(!a.empty() && a == read_file(dir / "run1" / f), f + " differs");
  }
  c.note(std::to_string(files.size()) + " outputs compared");
  return c.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"adjoint identity", adjoint_identity},
      {"shrink operators", shrink_analytics},
      {"step-size condition", step_size_condition},
      {"1-D oracle equivalence", oracle_equivalence},
      {"barycenter vs oracle", barycenter_correctness},
      {"convergence rate", convergence_rate},
      {"gaussian demo", gaussian_demo},
      {"mutual information", mi_diagnostics},
      {"gradient check", gradient_check},
      {"defense pipeline", defense_pipeline},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
