#pragma once

namespace admm {

/// Closed interval [lo, hi].
struct Interval {
  double lo;
  double hi;

  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
};

/// Separable hinge: max(1 − z, 0) for label 1, max(z, 0) for label 0.
double hinge(double z, double y);

/// Global minimizer of hinge(z, y) + λz + β(z − w)².
/// Ties between the two affine pieces go to the piece below the kink.
double solve_zL_hinge(double w, double y, double lambda, double beta);

/// ∂hinge(·, y) at z.
Interval hinge_subgradient_interval(double z, double y);

/// hinge(z, y) + λz + β(z − w)².
double final_objective(double z, double w, double y, double lambda, double beta);

}  // namespace admm
