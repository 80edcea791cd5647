#include "admm/linalg.hpp"

#include "admm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace admm {

Matrix make_matrix(std::size_t rows, std::size_t cols, std::span<const double> values) {
  if (values.size() != rows * cols) {
    throw DimensionMismatch("make_matrix: expected " + std::to_string(rows * cols) +
                            " values, got " + std::to_string(values.size()));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  if (!all_finite(m)) throw InvalidArgument("make_matrix: non-finite entry");
  return m;
}

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionMismatch("make_matrix: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return make_matrix(r, c, values);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix gram(const Matrix& a) {
  if (a.rows() == 0) throw InvalidArgument("gram: matrix has zero rows");
  Matrix g = a * a.transpose();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) g(j, i) = g(i, j);
  }
  return g;
}

Matrix cross_gram(const Matrix& z, const Matrix& a) {
  if (z.cols() != a.cols()) {
    throw DimensionMismatch("cross_gram: " + std::to_string(z.cols()) + " vs " +
                            std::to_string(a.cols()) + " columns");
  }
  Matrix c = z * a.transpose();
  // Keep cross_gram(A, A) bit-identical to gram(A).
  if (&z == &a) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) c(j, i) = c(i, j);
    }
  }
  return c;
}

SpdFactor::SpdFactor(const Matrix& g, double ridge) : ridge_(ridge) {
  if (g.rows() != g.cols()) throw DimensionMismatch("spd_factor: matrix is not square");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw InvalidArgument("spd_factor: ridge must be finite and nonnegative");
  }
  const Eigen::Index n = g.rows();
  lower_ = Matrix::Zero(n, n);
  // Row-oriented Cholesky so every inner product runs over contiguous row prefixes.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double s = g(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j));
      lower_(i, j) = s / lower_(j, j);
    }
    const double d = g(i, i) + ridge - lower_.row(i).head(i).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) throw SingularMatrixError(static_cast<std::size_t>(i), d);
    lower_(i, i) = std::sqrt(d);
  }
}

Matrix SpdFactor::reconstruct() const { return lower_ * lower_.transpose(); }

SpdFactor spd_factor(const Matrix& g, double ridge) { return SpdFactor(g, ridge); }

Matrix solve_left(const SpdFactor& factor, const Matrix& b) {
  if (static_cast<std::size_t>(b.rows()) != factor.dimension()) {
    throw DimensionMismatch("solve_left: factor dimension " + std::to_string(factor.dimension()) +
                            " vs " + std::to_string(b.rows()) + " rows");
  }
  // Column-major scratch keeps the triangular solves on contiguous columns.
  Eigen::MatrixXd x = b;
  factor.lower().triangularView<Eigen::Lower>().solveInPlace(x);
  factor.lower().transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix solve_right(const Matrix& c, const SpdFactor& factor) {
  if (static_cast<std::size_t>(c.cols()) != factor.dimension()) {
    throw DimensionMismatch("solve_right: factor dimension " + std::to_string(factor.dimension()) +
                            " vs " + std::to_string(c.cols()) + " columns");
  }
  // X·M = C with M symmetric is Mᵀ·Xᵀ = Cᵀ.
  Eigen::MatrixXd xt = c.transpose();
  factor.lower().triangularView<Eigen::Lower>().solveInPlace(xt);
  factor.lower().transpose().triangularView<Eigen::Upper>().solveInPlace(xt);
  return xt.transpose();
}

double mean_diagonal(const Matrix& g) {
  if (g.rows() == 0) return 0.0;
  return g.trace() / static_cast<double>(g.rows());
}

SpdFactor ridge_factor(const Matrix& g, double rel_ridge) {
  const double scale = mean_diagonal(g);
  const double eps = rel_ridge * scale;
  try {
    return SpdFactor(g, eps);
  } catch (const SingularMatrixError&) {
    double retry = std::max(eps, 1e-6 * scale);
    if (!(retry > 0.0)) retry = 1e-12;
    return SpdFactor(g, retry);
  }
}

double relative_frobenius(const Matrix& actual, const Matrix& expected) {
  if (actual.rows() != expected.rows() || actual.cols() != expected.cols()) {
    throw DimensionMismatch("relative_frobenius: shape mismatch");
  }
  const double denom = expected.norm();
  const double diff = (actual - expected).norm();
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace admm
