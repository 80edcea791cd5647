#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>

namespace admm {

/// Dense row-major matrix. Samples are stored one per column throughout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Builds a matrix from row-major values, rejecting non-finite entries.
Matrix make_matrix(std::size_t rows, std::size_t cols, std::span<const double> values);

/// Convenience literal: make_matrix({{1, 2}, {3, 4}}).
Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);

bool all_finite(const Matrix& m);

/// A·Aᵀ. Computed on the lower triangle and mirrored so the result is exactly symmetric.
Matrix gram(const Matrix& a);

/// Z·Aᵀ.
Matrix cross_gram(const Matrix& z, const Matrix& a);

/// Cholesky factor of (G + ridge·I), reusable for solves from either side.
class SpdFactor {
 public:
  /// Throws SingularMatrixError carrying the index of the first non-positive pivot.
  SpdFactor(const Matrix& g, double ridge);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
  double ridge() const noexcept { return ridge_; }

  /// Lower-triangular L with L·Lᵀ = G + ridge·I.
  const Matrix& lower() const noexcept { return lower_; }

  /// Reconstructs G + ridge·I from the factor.
  Matrix reconstruct() const;

 private:
  Matrix lower_;
  double ridge_;
};

SpdFactor spd_factor(const Matrix& g, double ridge);

/// X with X·M = C, M the factored matrix.
Matrix solve_right(const Matrix& c, const SpdFactor& factor);

/// X with M·X = B, M the factored matrix.
Matrix solve_left(const SpdFactor& factor, const Matrix& b);

/// trace(G)/n, the scale used for relative ridge terms. Zero for an empty matrix.
double mean_diagonal(const Matrix& g);

/// Factors G + ε·I with ε = rel_ridge·trace(G)/n. On a pivot failure retries once with
/// max(ε, 1e-6·trace(G)/n); the retry falls back to an absolute 1e-12 when G has zero trace.
SpdFactor ridge_factor(const Matrix& g, double rel_ridge);

double relative_frobenius(const Matrix& actual, const Matrix& expected);

}  // namespace admm
