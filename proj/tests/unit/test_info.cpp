#include <doctest.h>

#include <cmath>
#include <sstream>

#include "beckman/error.hpp"
#include "beckman/info.hpp"
#include "test_util.hpp"

using namespace beckman;
using beckman::testing::TempDir;
using beckman::testing::write_file;

namespace {

PredictionSet one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  std::vector<double> flat;
  for (std::size_t l : labels) {
    for (std::size_t c = 0; c < classes; ++c) flat.push_back(c == l ? 1.0 : 0.0);
  }
  return PredictionSet(classes, flat);
}

PredictionSet random_predictions(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<double> flat;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(classes);
    double s = 0.0;
    for (double& v : row) s += (v = -std::log(1.0 - rng.uniform()));
    for (double v : row) flat.push_back(v / s);
  }
  return PredictionSet(classes, flat);
}

}  // namespace

TEST_CASE("prediction rows are validated") {
  CHECK_THROWS_AS(PredictionSet(2, {0.5, 0.6}), InputError);
  CHECK_THROWS_AS(PredictionSet(2, {1.5, -0.5}), InputError);
  CHECK_THROWS_AS(PredictionSet(2, {1.0}), InputError);
  const PredictionSet p(2, {0.3, 0.7, 1.0, 0.0});
  CHECK(p.rows() == 2);
  CHECK(p(1, 0) == 1.0);
}

TEST_CASE("parameter/output surrogate examples") {
  CHECK(mi_param_output(PredictionSet(2, {0.3, 0.7, 0.3, 0.7, 0.3, 0.7})) <= 1e-15);
  CHECK(mi_param_output(one_hot({0, 1}, 2)) == doctest::Approx(0.25));
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const double v = mi_param_output(random_predictions(rng, 1 + rng.below(20), 2));
    CHECK(v >= 0.0);
    CHECK(v <= 0.25);
  }
  CHECK_THROWS_AS(mi_param_output(PredictionSet{}), InputError);
}

TEST_CASE("surrogate is invariant under row permutation") {
  const PredictionSet a(3, {0.2, 0.3, 0.5, 0.6, 0.3, 0.1, 0.1, 0.1, 0.8});
  const PredictionSet b(3, {0.1, 0.1, 0.8, 0.2, 0.3, 0.5, 0.6, 0.3, 0.1});
  CHECK(mi_param_output(a) == doctest::Approx(mi_param_output(b)).epsilon(1e-14));
}

TEST_CASE("pairwise information examples") {
  const PredictionSet labels = one_hot({0, 1, 0, 1, 1, 0}, 2);
  CHECK(mi_pairwise(labels, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  const PredictionSet constant(2, {0.3, 0.7, 0.3, 0.7, 0.3, 0.7, 0.3, 0.7, 0.3, 0.7, 0.3, 0.7});
  CHECK(std::abs(mi_pairwise(labels, constant)) <= 1e-9);

  // Ten one-hot pairs giving the joint [[0.4, 0.1], [0.1, 0.4]].
  const PredictionSet a = one_hot({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2);
  const PredictionSet b = one_hot({0, 0, 0, 0, 1, 0, 1, 1, 1, 1}, 2);
  const double expected = 2 * 0.4 * std::log(0.4 / 0.25) + 2 * 0.1 * std::log(0.1 / 0.25);
  CHECK(mi_pairwise(a, b) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(mi_pairwise(a, b) - 0.1927) <= 1e-4);
}

TEST_CASE("pairwise information is bounded and symmetric") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t classes = 2 + rng.below(4);
    const std::size_t n = 1 + rng.below(30);
    const PredictionSet a = random_predictions(rng, n, classes);
    const PredictionSet b = random_predictions(rng, n, classes);
    const double v = mi_pairwise(a, b);
    CHECK(v >= -1e-9);
    CHECK(v <= std::log(static_cast<double>(classes)) + 1e-9);
    CHECK(std::abs(v - mi_pairwise(b, a)) <= 1e-12);
  }
}

TEST_CASE("pairwise information needs matching shapes") {
  CHECK_THROWS_AS(mi_pairwise(one_hot({0, 1}, 2), one_hot({0}, 2)), InputError);
  CHECK_THROWS_AS(mi_pairwise(one_hot({0, 1}, 2), one_hot({0, 1}, 3)), InputError);
}

TEST_CASE("prediction CSV round trip and header handling") {
  TempDir dir("info");
  const PredictionSet p(3, {0.2, 0.3, 0.5, 1.0, 0.0, 0.0});
  std::ostringstream out;
  write_predictions_csv(out, p);
  CHECK(out.str().rfind("p0,p1,p2\n", 0) == 0);
  write_file(dir / "p.csv", out.str());
  const PredictionSet back = read_predictions_csv(dir / "p.csv");
  REQUIRE(back.rows() == 2);
  for (std::size_t i = 0; i < 6; ++i) CHECK(back.values()[i] == doctest::Approx(p.values()[i]));

  write_file(dir / "bare.csv", "0.5,0.5\n0.25,0.75\n");
  CHECK(read_predictions_csv(dir / "bare.csv").rows() == 2);
}

TEST_CASE("malformed prediction rows are reported by index") {
  TempDir dir("info");
  write_file(dir / "bad.csv", "p0,p1\n0.5,0.5\n0.2,0.7\n");
  try {
    read_predictions_csv(dir / "bad.csv");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  write_file(dir / "ragged.csv", "0.5,0.5\n1.0\n");
  CHECK_THROWS_AS(read_predictions_csv(dir / "ragged.csv"), InputError);
  CHECK_THROWS_AS(read_predictions_csv(dir / "none.csv"), IoError);
  // Within the 1e-3 tolerance the row is accepted and renormalized.
  write_file(dir / "loose.csv", "0.5,0.5004\n");
  CHECK(read_predictions_csv(dir / "loose.csv")(0, 0) + read_predictions_csv(dir / "loose.csv")(0, 1) ==
        doctest::Approx(1.0).epsilon(1e-15));
}
