#include "admm/loss.hpp"

#include "admm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace admm {

namespace {

bool positive_label(double y) {
  if (y == 1.0) return true;
  if (y == 0.0) return false;
  throw InvalidArgument("hinge: label must be 0 or 1");
}

}  // namespace

double hinge(double z, double y) {
  return positive_label(y) ? std::max(1.0 - z, 0.0) : std::max(z, 0.0);
}

double final_objective(double z, double w, double y, double lambda, double beta) {
  const double d = z - w;
  return hinge(z, y) + lambda * z + beta * d * d;
}

double solve_zL_hinge(double w, double y, double lambda, double beta) {
  if (!std::isfinite(w) || !std::isfinite(lambda) || !std::isfinite(beta)) {
    throw InvalidArgument("solve_zL_hinge: non-finite input");
  }
  if (!(beta > 0.0)) throw InvalidArgument("solve_zL_hinge: beta must be positive");
  const double two_beta = 2.0 * beta;
  double lower = 0.0;
  double upper = 0.0;
  if (positive_label(y)) {
    // z ≤ 1: loss 1 − z.  z ≥ 1: loss 0.
    lower = std::min(1.0, w + (1.0 - lambda) / two_beta);
    upper = std::max(1.0, w - lambda / two_beta);
  } else {
    // z ≤ 0: loss 0.  z ≥ 0: loss z.
    lower = std::min(0.0, w - lambda / two_beta);
    upper = std::max(0.0, w - (1.0 + lambda) / two_beta);
  }
  const double f_lower = final_objective(lower, w, y, lambda, beta);
  const double f_upper = final_objective(upper, w, y, lambda, beta);
  return f_upper < f_lower ? upper : lower;
}

Interval hinge_subgradient_interval(double z, double y) {
  if (positive_label(y)) {
    if (z < 1.0) return {-1.0, -1.0};
    if (z > 1.0) return {0.0, 0.0};
    return {-1.0, 0.0};
  }
  if (z < 0.0) return {0.0, 0.0};
  if (z > 0.0) return {1.0, 1.0};
  return {0.0, 1.0};
}

}  // namespace admm
