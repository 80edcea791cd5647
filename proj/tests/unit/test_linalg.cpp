#include "admm/errors.hpp"
#include "admm/linalg.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace admm;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

TEST_CASE("make_matrix rejects bad input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double values[] = {1.0, nan};
  CHECK_THROWS_AS(make_matrix(1, 2, values), InvalidArgument);
  CHECK_THROWS_AS(make_matrix(2, 2, values), DimensionMismatch);
  const auto m = make_matrix({{1, 2}, {3, 4}});
  CHECK(m(1, 0) == 3.0);
}

TEST_CASE("gram examples") {
  CHECK(gram(make_matrix({{1, 2}})) == make_matrix({{5}}));
  CHECK(gram(Matrix::Identity(2, 2)) == Matrix::Identity(2, 2));
  CHECK(gram(make_matrix({{1}, {2}})) == make_matrix({{1, 2}, {2, 4}}));
  CHECK_THROWS_AS(gram(Matrix(0, 3)), InvalidArgument);
}

TEST_CASE("cross_gram examples") {
  CHECK(cross_gram(make_matrix({{3}}), make_matrix({{1}})) == make_matrix({{3}}));
  CHECK(cross_gram(make_matrix({{1, 3}}), make_matrix({{1, 1}})) == make_matrix({{4}}));
  CHECK(cross_gram(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) == Matrix::Identity(2, 2));
  CHECK_THROWS_AS(cross_gram(make_matrix({{1, 2}}), make_matrix({{1}})), DimensionMismatch);
}

TEST_CASE("spd_factor and solves") {
  const auto f4 = spd_factor(make_matrix({{4}}), 0.0);
  CHECK(solve_left(f4, make_matrix({{8}}))(0, 0) == doctest::Approx(2.0));

  const auto tiny = spd_factor(make_matrix({{0}}), 1e-8);
  CHECK(tiny.reconstruct()(0, 0) == doctest::Approx(1e-8));

  // [[1,2],[2,1]] has characteristic polynomial t² − 2t − 3 = (t − 3)(t + 1).
  const double tr = 2.0, det = 1.0 - 4.0;
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  CHECK((tr - disc) / 2.0 == doctest::Approx(-1.0));
  try {
    spd_factor(make_matrix({{1, 2}, {2, 1}}), 0.0);
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot() == 1);
  }

  const auto f2 = spd_factor(make_matrix({{2}}), 0.0);
  CHECK(solve_right(make_matrix({{4}}), f2)(0, 0) == doctest::Approx(2.0));
  CHECK(solve_right(make_matrix({{4}}), spd_factor(make_matrix({{2}}), 2.0))(0, 0) == doctest::Approx(1.0));
  const auto fi = spd_factor(Matrix::Identity(3, 3), 0.0);
  CHECK(solve_right(Matrix::Identity(3, 3), fi) == Matrix::Identity(3, 3));
  const Matrix b = make_matrix({{1, -2}, {3, 4}, {0.5, 7}});
  CHECK(solve_left(fi, b) == b);
  CHECK(solve_left(f2, make_matrix({{4}}))(0, 0) == doctest::Approx(2.0));
  CHECK(solve_left(spd_factor(make_matrix({{2}}), 1.0), make_matrix({{6}}))(0, 0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(solve_left(f2, Matrix::Ones(2, 1)), DimensionMismatch);
  CHECK_THROWS_AS(solve_right(Matrix::Ones(1, 2), f2), DimensionMismatch);
  CHECK_THROWS_AS(spd_factor(Matrix::Ones(2, 3), 0.0), DimensionMismatch);
}

TEST_CASE("ridge_factor retries once with a larger ridge") {
  // Rank one: the relative ridge of 1e-8 alone leaves a pivot at round-off level.
  const Matrix g = make_matrix({{1, 1}, {1, 1}});
  const auto f = ridge_factor(g, 0.0);
  CHECK(f.ridge() == doctest::Approx(1e-6));
  const auto z = ridge_factor(Matrix::Zero(2, 2), 1e-8);
  CHECK(z.ridge() == doctest::Approx(1e-12));
}

TEST_CASE("gram properties on random matrices") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 7);
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % 40);
    const Matrix a = random_matrix(rng, rows, cols);
    const Matrix g = gram(a);
    CHECK(g == g.transpose());
    CHECK(cross_gram(a, a) == g);
    const Eigen::VectorXd x = random_matrix(rng, rows, 1);
    CHECK(x.dot(g * x) >= -1e-12 * x.squaredNorm());

    if (cols >= 2) {
      const Eigen::Index cut = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(cols - 1));
      const Matrix left = a.leftCols(cut);
      const Matrix right = a.rightCols(cols - cut);
      CHECK(relative_frobenius(gram(left) + gram(right), g) <= 1e-12);
    }
  }
}

TEST_CASE("solves reproduce their right-hand sides") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
    const Matrix a = random_matrix(rng, n, 3 * n + 5);
    const Matrix g = gram(a);
    const auto f = spd_factor(g, 0.1);
    const Matrix m = g + 0.1 * Matrix::Identity(n, n);
    CHECK(relative_frobenius(f.reconstruct(), m) <= 1e-10);

    const Matrix c = random_matrix(rng, 4, n);
    CHECK(relative_frobenius(solve_right(c, f) * m, c) <= 1e-8);
    const Matrix b = random_matrix(rng, n, 6);
    CHECK(relative_frobenius(m * solve_left(f, b), b) <= 1e-8);
  }
}
