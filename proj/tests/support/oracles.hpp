#pragma once

// Brute-force references used only by tests. Nothing here calls into the solvers under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace admm::testing {

struct GridMin {
  double argmin;
  double value;
};

/// Exhaustive scan of fn over lo, lo+step, ..., hi.
template <typename Fn>
GridMin grid_minimum(const Fn& fn, double lo = -5.0, double hi = 5.0, double step = 1e-4) {
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  GridMin best{lo, fn(lo)};
  for (std::size_t i = 1; i < count; ++i) {
    const double z = lo + step * static_cast<double>(i);
    const double f = fn(z);
    if (f < best.value) best = {z, f};
  }
  return best;
}

/// Minimum value only of the same exhaustive scan.
template <typename Fn>
double grid_minimum_value(const Fn& fn, double lo = -5.0, double hi = 5.0, double step = 1e-4) {
  const auto count = static_cast<std::int64_t>(std::llround((hi - lo) / step)) + 1;
  double best = fn(lo);
#pragma omp simd reduction(min : best)
  for (std::int64_t i = 1; i < count; ++i) {
    const double f = fn(lo + step * static_cast<double>(i));
    best = f < best ? f : best;
  }
  return best;
}

inline constexpr auto ref_relu = [](double x) { return std::max(x, 0.0); };
inline constexpr auto ref_hardsig = [](double x) { return std::clamp(x, 0.0, 1.0); };

inline double ref_hinge(double z, double y) {
  return y == 1.0 ? std::max(1.0 - z, 0.0) : std::max(z, 0.0);
}

/// γ(a − h(z))² + β(z − w)² for a reference activation.
template <typename H>
auto output_problem(H h, double a, double w, double gamma, double beta) {
  return [=](double z) {
    const double r = a - h(z);
    return gamma * r * r + beta * (z - w) * (z - w);
  };
}

/// hinge(z, y) + λz + β(z − w)².
inline auto final_problem(double w, double y, double lambda, double beta) {
  return [=](double z) { return ref_hinge(z, y) + lambda * z + beta * (z - w) * (z - w); };
}

}  // namespace admm::testing
