#pragma once

#include "admm/data.hpp"
#include "admm/linalg.hpp"
#include "admm/metrics.hpp"
#include "admm/network.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace admm {

/// Plain mini-batch SGD, no momentum.
struct SgdConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gaussian weights with variance 1/fan-in.
std::vector<Matrix> sgd_init_weights(const Architecture& arch, std::uint64_t seed);

/// Σ hinge over all entries of the scores of `x`.
double hinge_loss_sum(const std::vector<Matrix>& weights, const Matrix& x, const Matrix& y,
                      const Architecture& arch);

/// Backprop gradient of hinge_loss_sum. Kinks take derivative 0 (ReLU at 0, hinge at its
/// margin; hard sigmoid at 0 and 1).
std::vector<Matrix> sgd_gradient(const std::vector<Matrix>& weights, const Matrix& x,
                                 const Matrix& y, const Architecture& arch);

/// History rows are epochs; objective is the full-batch hinge sum. Throws DivergedError when
/// the loss becomes non-finite.
TrainResult sgd_train(const Dataset& data, const Architecture& arch, const SgdConfig& cfg,
                      const TrainOptions& options = {});

/// Largest relative discrepancy between backprop and central differences (step 1e-5) for one
/// sample, relative to max(|analytic|, |numeric|, 1e-4). Returns nullopt when a pre-activation
/// or score lies within 1e-4 of a kink, where the derivative is not defined.
std::optional<double> gradient_check(const Architecture& arch, const SgdConfig& cfg,
                                     const Matrix& x, const Matrix& y);

/// Runs each learning rate for cfg.epochs and returns the one with the best final train
/// accuracy (lower final loss breaks ties). Diverged runs are skipped.
double sgd_search_learning_rate(const Dataset& data, const Architecture& arch, const SgdConfig& cfg,
                                std::span<const double> grid);

}  // namespace admm
