#pragma once

#include "admm/linalg.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace admm {

/// Entrywise nonlinearity h of a hidden layer.
///
/// relu and hard_sigmoid are piecewise linear and have closed-form output updates.
/// A tabulated activation samples an arbitrary monotone function on a uniform grid,
/// interpolates linearly between samples and holds the end values outside the grid;
/// its output update falls back to grid search.
class Activation {
 public:
  enum class Kind { relu, hard_sigmoid, tabulated };

  static Activation relu() { return Activation(Kind::relu); }
  static Activation hard_sigmoid() { return Activation(Kind::hard_sigmoid); }

  /// Samples must be nondecreasing; at least two are required.
  static Activation tabulated(double lo, double hi, std::vector<double> samples);
  static Activation tabulate(const std::function<double(double)>& fn, double lo, double hi,
                             std::size_t count);

  /// Parses "relu" or "hardsig"/"hard_sigmoid".
  static Activation from_name(const std::string& name);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;

  double operator()(double x) const;
  Matrix apply(const Matrix& x) const;

  // Table geometry, meaningful for tabulated activations only.
  double table_lo() const noexcept { return lo_; }
  double table_hi() const noexcept { return hi_; }
  double table_step() const noexcept;

 private:
  explicit Activation(Kind kind) : kind_(kind) {}

  Kind kind_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> samples_;
};

Matrix apply(const Activation& h, const Matrix& x);

/// γ(a − h(z))² + β(z − w)², the scalar output-update objective.
double output_objective(const Activation& h, double z, double a, double w, double gamma,
                        double beta);

/// Global minimizer for h = relu. Ties go to the nonnegative branch.
double solve_z_relu(double a, double w, double gamma, double beta);

/// Global minimizer for h = hard sigmoid over the branches z≤0, 0≤z≤1, z≥1.
/// Ties go to the middle branch, then the lower one.
double solve_z_hardsig(double a, double w, double gamma, double beta);

/// Best point of the grid lo, lo+step, ... ≤ hi; the lowest index wins ties.
double solve_z_grid(const Activation& h, double a, double w, double gamma, double beta, double lo,
                    double hi, double step);

/// Dispatches to the closed form for piecewise-linear kinds. Tabulated activations search
/// the table range at an eighth of its spacing and also weigh the exact minimizers of the
/// constant tails.
double solve_z(const Activation& h, double a, double w, double gamma, double beta);

}  // namespace admm
