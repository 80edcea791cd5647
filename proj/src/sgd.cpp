#include "admm/sgd.hpp"

#include "admm/errors.hpp"
#include "admm/loss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace admm {

namespace {

double activation_slope(const Activation& h, double z) {
  switch (h.kind()) {
    case Activation::Kind::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Kind::hard_sigmoid:
      return (z > 0.0 && z < 1.0) ? 1.0 : 0.0;
    case Activation::Kind::tabulated: {
      const double step = h.table_step();
      if (z <= h.table_lo() || z >= h.table_hi()) return 0.0;
      return (h(z + 0.5 * step) - h(z - 0.5 * step)) / step;
    }
  }
  return 0.0;
}

double hinge_slope(double z, double y) {
  if (y == 1.0) return z < 1.0 ? -1.0 : 0.0;
  return z > 0.0 ? 1.0 : 0.0;
}

/// Pre-activations z₁…z_L for the columns of x.
std::vector<Matrix> forward(const std::vector<Matrix>& weights, const Matrix& x,
                            const Architecture& arch) {
  std::vector<Matrix> zs;
  Matrix a = x;
  for (std::size_t l = 1; l <= arch.layers(); ++l) {
    zs.emplace_back(weights[l - 1] * a);
    if (l < arch.layers()) a = arch.activation(l).apply(zs.back());
  }
  return zs;
}

}  // namespace

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be nonnegative");
  }
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
}

std::vector<Matrix> sgd_init_weights(const Architecture& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> weights;
  for (std::size_t l = 1; l <= arch.layers(); ++l) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(arch.dims[l - 1])));
    Matrix w(static_cast<Eigen::Index>(arch.dims[l]), static_cast<Eigen::Index>(arch.dims[l - 1]));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    weights.push_back(std::move(w));
  }
  return weights;
}

double hinge_loss_sum(const std::vector<Matrix>& weights, const Matrix& x, const Matrix& y,
                      const Architecture& arch) {
  const Matrix scores = forward(weights, x, arch).back();
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) total += hinge(scores.data()[i], y.data()[i]);
  return total;
}

std::vector<Matrix> sgd_gradient(const std::vector<Matrix>& weights, const Matrix& x,
                                 const Matrix& y, const Architecture& arch) {
  const std::size_t L = arch.layers();
  const std::vector<Matrix> zs = forward(weights, x, arch);
  std::vector<Matrix> grads(L);
  Matrix delta(zs[L - 1].rows(), zs[L - 1].cols());
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    delta.data()[i] = hinge_slope(zs[L - 1].data()[i], y.data()[i]);
  }
  for (std::size_t l = L; l >= 1; --l) {
    const Matrix a_prev = l == 1 ? x : arch.activation(l - 1).apply(zs[l - 2]);
    grads[l - 1] = delta * a_prev.transpose();
    if (l == 1) break;
    Matrix back = weights[l - 1].transpose() * delta;
    const Matrix& z = zs[l - 2];
    const Activation& h = arch.activation(l - 1);
    for (Eigen::Index i = 0; i < back.size(); ++i) back.data()[i] *= activation_slope(h, z.data()[i]);
    delta = std::move(back);
  }
  return grads;
}

TrainResult sgd_train(const Dataset& data, const Architecture& arch, const SgdConfig& cfg,
                      const TrainOptions& options) {
  using Clock = std::chrono::steady_clock;
  arch.validate();
  cfg.validate();
  if (data.feature_dim() != arch.dims.front() || data.class_count() != arch.dims.back()) {
    throw InvalidArgument("dataset shape does not match architecture");
  }
  std::vector<Matrix> weights = sgd_init_weights(arch, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(data.samples());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainResult result;
  double elapsed = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - b);
      Matrix xb(data.features.rows(), static_cast<Eigen::Index>(count));
      Matrix yb(data.labels.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t j = 0; j < count; ++j) {
        xb.col(static_cast<Eigen::Index>(j)) = data.features.col(order[b + j]);
        yb.col(static_cast<Eigen::Index>(j)) = data.labels.col(order[b + j]);
      }
      const auto grads = sgd_gradient(weights, xb, yb, arch);
      const double step = cfg.learning_rate / static_cast<double>(count);
      for (std::size_t l = 0; l < weights.size(); ++l) weights[l] -= step * grads[l];
    }
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();

    IterationRecord rec;
    rec.iteration = epoch + 1;
    rec.wall_seconds = elapsed;
    rec.objective = hinge_loss_sum(weights, data.features, data.labels, arch);
    if (!std::isfinite(rec.objective)) {
      std::ostringstream msg;
      msg << "SGD diverged at epoch " << epoch + 1 << " (learning rate " << cfg.learning_rate << ")";
      throw DivergedError(msg.str());
    }
    rec.train_accuracy = accuracy(weights, data, arch);
    if (options.test) rec.test_accuracy = accuracy(weights, *options.test, arch);
    result.history.push_back(rec);
    if (options.on_iteration && !options.on_iteration(rec, weights)) break;
  }
  result.weights = std::move(weights);
  return result;
}

std::optional<double> gradient_check(const Architecture& arch, const SgdConfig& cfg,
                                     const Matrix& x, const Matrix& y) {
  constexpr double kStep = 1e-5;
  constexpr double kKinkMargin = 1e-4;
  arch.validate();
  std::vector<Matrix> weights = sgd_init_weights(arch, cfg.seed);
  const auto zs = forward(weights, x, arch);
  for (std::size_t l = 1; l < arch.layers(); ++l) {
    const bool hardsig = arch.activation(l).kind() == Activation::Kind::hard_sigmoid;
    for (Eigen::Index i = 0; i < zs[l - 1].size(); ++i) {
      const double z = zs[l - 1].data()[i];
      if (std::abs(z) < kKinkMargin || (hardsig && std::abs(z - 1.0) < kKinkMargin)) return std::nullopt;
    }
  }
  const Matrix& scores = zs.back();
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double kink = y.data()[i] == 1.0 ? 1.0 : 0.0;
    if (std::abs(scores.data()[i] - kink) < kKinkMargin) return std::nullopt;
  }

  const auto grads = sgd_gradient(weights, x, y, arch);
  double worst = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].size(); ++i) {
      double& w = weights[l].data()[i];
      const double saved = w;
      w = saved + kStep;
      const double up = hinge_loss_sum(weights, x, y, arch);
      w = saved - kStep;
      const double down = hinge_loss_sum(weights, x, y, arch);
      w = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      const double analytic = grads[l].data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

double sgd_search_learning_rate(const Dataset& data, const Architecture& arch, const SgdConfig& cfg,
                                std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("learning-rate grid is empty");
  double best_rate = grid.front();
  double best_acc = -1.0;
  double best_loss = 0.0;
  for (const double rate : grid) {
    SgdConfig trial = cfg;
    trial.learning_rate = rate;
    try {
      const auto run = sgd_train(data, arch, trial);
      if (run.history.empty()) continue;
      const auto& last = run.history.back();
      if (last.train_accuracy > best_acc ||
          (last.train_accuracy == best_acc && last.objective < best_loss)) {
        best_acc = last.train_accuracy;
        best_loss = last.objective;
        best_rate = rate;
      }
    } catch (const DivergedError&) {
    }
  }
  return best_rate;
}

}  // namespace admm
