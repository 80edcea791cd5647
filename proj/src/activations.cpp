#include "admm/activations.hpp"

#include "admm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace admm {

namespace {

void require_finite(double a, double w, double gamma, double beta, const char* who) {
  if (!std::isfinite(a) || !std::isfinite(w) || !std::isfinite(gamma) || !std::isfinite(beta)) {
    throw InvalidArgument(std::string(who) + ": non-finite input");
  }
  if (!(gamma > 0.0) || !(beta > 0.0)) {
    throw InvalidArgument(std::string(who) + ": gamma and beta must be positive");
  }
}

}  // namespace

Activation Activation::tabulated(double lo, double hi, std::vector<double> samples) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("tabulated activation: need finite lo < hi");
  }
  if (samples.size() < 2) throw InvalidArgument("tabulated activation: need at least 2 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) throw InvalidArgument("tabulated activation: non-finite sample");
    if (i > 0 && samples[i] < samples[i - 1]) {
      throw InvalidArgument("tabulated activation: samples must be nondecreasing");
    }
  }
  Activation h(Kind::tabulated);
  h.lo_ = lo;
  h.hi_ = hi;
  h.samples_ = std::move(samples);
  return h;
}

Activation Activation::tabulate(const std::function<double(double)>& fn, double lo, double hi,
                                std::size_t count) {
  if (count < 2) throw InvalidArgument("tabulate: need at least 2 samples");
  std::vector<double> samples(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) samples[i] = fn(lo + step * static_cast<double>(i));
  return tabulated(lo, hi, std::move(samples));
}

Activation Activation::from_name(const std::string& name) {
  if (name == "relu") return relu();
  if (name == "hardsig" || name == "hard_sigmoid") return hard_sigmoid();
  throw InvalidArgument("unknown activation '" + name + "' (expected relu or hardsig)");
}

std::string Activation::name() const {
  switch (kind_) {
    case Kind::relu: return "relu";
    case Kind::hard_sigmoid: return "hardsig";
    case Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

double Activation::table_step() const noexcept {
  if (samples_.size() < 2) return 0.0;
  return (hi_ - lo_) / static_cast<double>(samples_.size() - 1);
}

double Activation::operator()(double x) const {
  switch (kind_) {
    case Kind::relu:
      return x > 0.0 ? x : 0.0;
    case Kind::hard_sigmoid:
      if (x >= 1.0) return 1.0;
      return x > 0.0 ? x : 0.0;
    case Kind::tabulated: {
      if (x <= lo_) return samples_.front();
      if (x >= hi_) return samples_.back();
      const double t = (x - lo_) / table_step();
      const auto i = std::min(static_cast<std::size_t>(t), samples_.size() - 2);
      const double frac = t - static_cast<double>(i);
      return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
    }
  }
  return 0.0;
}

Matrix Activation::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  const double* src = x.data();
  double* dst = out.data();
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) dst[i] = (*this)(src[i]);
  return out;
}

Matrix apply(const Activation& h, const Matrix& x) { return h.apply(x); }

double output_objective(const Activation& h, double z, double a, double w, double gamma,
                        double beta) {
  const double r = a - h(z);
  const double d = z - w;
  return gamma * r * r + beta * d * d;
}

double solve_z_relu(double a, double w, double gamma, double beta) {
  require_finite(a, w, gamma, beta, "solve_z_relu");
  // z ≥ 0: h(z) = z, unconstrained minimizer of γ(a−z)² + β(z−w)² clamped to the piece.
  const double z_pos = std::max(0.0, (gamma * a + beta * w) / (gamma + beta));
  // z ≤ 0: h(z) = 0.
  const double z_neg = std::min(w, 0.0);
  const double f_pos = gamma * (a - z_pos) * (a - z_pos) + beta * (z_pos - w) * (z_pos - w);
  const double f_neg = gamma * a * a + beta * (z_neg - w) * (z_neg - w);
  return f_neg < f_pos ? z_neg : z_pos;
}

double solve_z_hardsig(double a, double w, double gamma, double beta) {
  require_finite(a, w, gamma, beta, "solve_z_hardsig");
  const double z_mid = std::clamp((gamma * a + beta * w) / (gamma + beta), 0.0, 1.0);
  const double z_low = std::min(w, 0.0);
  const double z_up = std::max(w, 1.0);
  const double f_mid = gamma * (a - z_mid) * (a - z_mid) + beta * (z_mid - w) * (z_mid - w);
  const double f_low = gamma * a * a + beta * (z_low - w) * (z_low - w);
  const double f_up = gamma * (a - 1.0) * (a - 1.0) + beta * (z_up - w) * (z_up - w);
  double best = z_mid;
  double f_best = f_mid;
  if (f_low < f_best) {
    best = z_low;
    f_best = f_low;
  }
  if (f_up < f_best) best = z_up;
  return best;
}

double solve_z_grid(const Activation& h, double a, double w, double gamma, double beta, double lo,
                    double hi, double step) {
  require_finite(a, w, gamma, beta, "solve_z_grid");
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("solve_z_grid: step must be positive");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("solve_z_grid: empty grid");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  double best = lo;
  double f_best = output_objective(h, lo, a, w, gamma, beta);
  for (std::size_t i = 1; i < count; ++i) {
    const double z = lo + step * static_cast<double>(i);
    const double f = output_objective(h, z, a, w, gamma, beta);
    if (f < f_best) {
      f_best = f;
      best = z;
    }
  }
  return best;
}

double solve_z(const Activation& h, double a, double w, double gamma, double beta) {
  switch (h.kind()) {
    case Activation::Kind::relu:
      return solve_z_relu(a, w, gamma, beta);
    case Activation::Kind::hard_sigmoid:
      return solve_z_hardsig(a, w, gamma, beta);
    case Activation::Kind::tabulated: {
      const double lo = h.table_lo();
      const double hi = h.table_hi();
      double best = solve_z_grid(h, a, w, gamma, beta, lo, hi, h.table_step() / 8.0);
      double f_best = output_objective(h, best, a, w, gamma, beta);
      // h is constant beyond the table, so the tail minimizers are clamps of w.
      for (const double z : {std::min(w, lo), std::max(w, hi)}) {
        const double f = output_objective(h, z, a, w, gamma, beta);
        if (f < f_best) {
          f_best = f;
          best = z;
        }
      }
      return best;
    }
  }
  return w;
}

}  // namespace admm
