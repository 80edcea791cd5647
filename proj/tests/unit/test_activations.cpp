#include "admm/activations.hpp"
#include "admm/errors.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace admm;
using admm::testing::grid_minimum;
using admm::testing::output_problem;
using admm::testing::ref_hardsig;
using admm::testing::ref_relu;

TEST_CASE("apply") {
  CHECK(Activation::relu().apply(make_matrix({{-1, 0, 2}})) == make_matrix({{0, 0, 2}}));
  CHECK(Activation::hard_sigmoid().apply(make_matrix({{-0.5, 0.5, 1.5}})) ==
        make_matrix({{0, 0.5, 1}}));
  CHECK(apply(Activation::relu(), Matrix::Zero(3, 2)) == Matrix::Zero(3, 2));
}

TEST_CASE("tabulated activation") {
  const auto h = Activation::tabulate([](double x) { return 1.0 / (1.0 + std::exp(-x)); }, -6, 6, 121);
  CHECK(h(0.0) == doctest::Approx(0.5));
  CHECK(h(-10.0) == doctest::Approx(1.0 / (1.0 + std::exp(6.0))));
  CHECK(h(0.05) == doctest::Approx(1.0 / (1.0 + std::exp(-0.05))).epsilon(1e-4));
  CHECK_THROWS_AS(Activation::tabulated(0, 1, {1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(Activation::tabulated(1, 0, {0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(Activation::from_name("tanh"), InvalidArgument);

  // The dispatching solver reaches the brute-force optimum up to its grid spacing.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng) / 3.0 + 0.5, w = u(rng);
    const double z = solve_z(h, a, w, 10.0, 1.0);
    const auto ref = grid_minimum([&](double t) { return output_objective(h, t, a, w, 10.0, 1.0); },
                                  -8, 8, 1e-3);
    CHECK(output_objective(h, z, a, w, 10.0, 1.0) <= ref.value + 1e-3);
  }
}

TEST_CASE("solve_z_relu examples") {
  CHECK(solve_z_relu(1, 1, 10, 1) == 1.0);
  CHECK(output_objective(Activation::relu(), 1, 1, 1, 10, 1) == 0.0);

  const auto ref = grid_minimum(output_problem(ref_relu, 1, -1, 1, 1));
  CHECK(ref.argmin == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(solve_z_relu(1, -1, 1, 1) == -1.0);
  CHECK(output_objective(Activation::relu(), -1, 1, -1, 1, 1) == 1.0);
  CHECK(output_objective(Activation::relu(), 0, 1, -1, 1, 1) == 2.0);

  const auto ref2 = grid_minimum(output_problem(ref_relu, -1, -2, 1, 1));
  CHECK(ref2.argmin == doctest::Approx(-2.0).epsilon(1e-4));
  CHECK(solve_z_relu(-1, -2, 1, 1) == -2.0);
  CHECK(output_objective(Activation::relu(), 0, -1, -2, 1, 1) == 5.0);

  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_z_relu(inf, 0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(solve_z_relu(0, 0, 0, 1), InvalidArgument);
}

TEST_CASE("solve_z_hardsig examples") {
  CHECK(solve_z_hardsig(0.5, 0.5, 1, 1) == 0.5);
  CHECK(solve_z_hardsig(1, 2, 1, 1) == 2.0);
  const auto ref = grid_minimum(output_problem(ref_hardsig, 0, 1.5, 1, 1));
  CHECK(ref.argmin == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(solve_z_hardsig(0, 1.5, 1, 1) == 1.5);
  const auto h = Activation::hard_sigmoid();
  CHECK(output_objective(h, 1.5, 0, 1.5, 1, 1) == 1.0);
  CHECK(output_objective(h, 0.75, 0, 1.5, 1, 1) == doctest::Approx(1.125));
  CHECK(output_objective(h, 0.0, 0, 1.5, 1, 1) == doctest::Approx(2.25));
  CHECK_THROWS_AS(solve_z_hardsig(std::nan(""), 0, 1, 1), InvalidArgument);
}

TEST_CASE("solve_z_grid examples") {
  const auto relu = Activation::relu();
  CHECK(solve_z_grid(relu, 1, 1, 1, 1, -5, 5, 1e-3) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(solve_z_grid(relu, 1, -1, 1, 1, -5, 5, 1e-3) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(solve_z_grid(Activation::hard_sigmoid(), 0, 1.5, 1, 1, -5, 5, 1e-3) ==
        doctest::Approx(1.5).epsilon(1e-3));
  CHECK_THROWS_AS(solve_z_grid(relu, 1, 1, 1, 1, 5, -5, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(solve_z_grid(relu, 1, 1, 1, 1, -5, 5, 0.0), InvalidArgument);
  // z = 1 and z = 2 both score β/4; the lower grid index wins.
  CHECK(solve_z_grid(Activation::hard_sigmoid(), 1, 1.5, 1, 1, 1, 2, 1) == 1.0);
}

TEST_CASE("closed forms match the brute-force oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> aw(-3, 3), gb(0.1, 10);
  const auto relu = Activation::relu();
  const auto hs = Activation::hard_sigmoid();
  for (int i = 0; i < 300; ++i) {
    const double a = aw(rng), w = aw(rng), g = gb(rng), b = gb(rng);
    const auto r1 = grid_minimum(output_problem(ref_relu, a, w, g, b));
    CHECK(output_objective(relu, solve_z_relu(a, w, g, b), a, w, g, b) <= r1.value + 1e-9);
    const auto r2 = grid_minimum(output_problem(ref_hardsig, a, w, g, b));
    CHECK(output_objective(hs, solve_z_hardsig(a, w, g, b), a, w, g, b) <= r2.value + 1e-9);
  }
}

TEST_CASE("exact fit and scale covariance") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3), s(0.1, 10);
  for (int i = 0; i < 500; ++i) {
    const double w = u(rng), g = s(rng), b = s(rng), c = s(rng);
    if (w > 0) CHECK(solve_z_relu(w, w, g, b) == doctest::Approx(w).epsilon(1e-15));
    if (w > 0 && w < 1) CHECK(solve_z_hardsig(w, w, g, b) == doctest::Approx(w).epsilon(1e-15));
    CHECK(output_objective(Activation::relu(), solve_z_relu(ref_relu(w), w, g, b), ref_relu(w), w, g, b) <= 1e-24);

    const double a = u(rng);
    CHECK(solve_z_relu(a, w, c * g, c * b) == doctest::Approx(solve_z_relu(a, w, g, b)).epsilon(1e-12));
    CHECK(solve_z_hardsig(a, w, c * g, c * b) ==
          doctest::Approx(solve_z_hardsig(a, w, g, b)).epsilon(1e-12));
  }
}
