#pragma once

#include "admm/activations.hpp"
#include "admm/data.hpp"
#include "admm/linalg.hpp"
#include "admm/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace admm {

/// Layer widths d₀…d_L and one activation per hidden layer. The last layer is linear.
struct Architecture {
  std::vector<std::size_t> dims;
  std::vector<Activation> activations;

  /// Every hidden layer uses `h`.
  static Architecture uniform(std::vector<std::size_t> dims, Activation h = Activation::relu());

  std::size_t layers() const noexcept { return dims.empty() ? 0 : dims.size() - 1; }
  const Activation& activation(std::size_t l) const { return activations.at(l - 1); }
  void validate() const;
};

struct Hyperparams {
  std::vector<double> beta;   ///< β₁…β_L
  std::vector<double> gamma;  ///< γ₁…γ_{L−1}
  std::size_t warmup_iters = 10;
  std::size_t train_iters = 0;
  /// Relative ridge: Gram solves add (ridge·trace(G)/n)·I.
  double ridge = 1e-8;
  std::uint64_t seed = 0;

  /// β = 1 and γ = 10 on every layer.
  static Hyperparams defaults(const Architecture& arch, double beta = 1.0, double gamma = 10.0);

  double beta_at(std::size_t l) const { return beta.at(l - 1); }
  double gamma_at(std::size_t l) const { return gamma.at(l - 1); }
  void validate(const Architecture& arch) const;
};

/// Every variable of the augmented objective. Layer indices are 1-based in accessors.
struct NetworkState {
  std::shared_ptr<const Matrix> input;   ///< a₀, shared and never modified
  std::shared_ptr<const Matrix> labels;  ///< y, one-hot
  std::shared_ptr<const Matrix> input_gram;  ///< a₀a₀ᵀ, cached since a₀ is fixed
  std::vector<Matrix> weights;  ///< W₁…W_L; empty until first updated
  std::vector<Matrix> hidden;   ///< a₁…a_{L−1}
  std::vector<Matrix> outputs;  ///< z₁…z_L
  Matrix lambda;                ///< d_L × n

  std::size_t layers() const noexcept { return outputs.size(); }
  std::size_t samples() const noexcept { return static_cast<std::size_t>(input->cols()); }

  const Matrix& activation(std::size_t l) const { return l == 0 ? *input : hidden.at(l - 1); }
  Matrix& activation_mut(std::size_t l) { return hidden.at(l - 1); }
  const Matrix& weight(std::size_t l) const { return weights.at(l - 1); }
  const Matrix& output(std::size_t l) const { return outputs.at(l - 1); }

  /// Gram matrix of a_{l−1}, using the cache for the input layer.
  Matrix activation_gram(std::size_t l) const;

  /// W_l·a_{l−1}, or zeros while W_l is still unallocated.
  Matrix linear_prediction(std::size_t l) const;
};

/// Fills a₁…a_{L−1} and z₁…z_L with unit Gaussians (row-major draw order, hidden
/// activations first), λ = 0, weights unallocated.
NetworkState init_state(const Architecture& arch, const Dataset& data, const Hyperparams& hp);

/// Columns [begin, begin + count) of every sample-indexed variable. Weights are copied.
NetworkState slice_state(const NetworkState& state, std::size_t begin, std::size_t count);

/// W_l ← z_l a_{l−1}ᵀ (a_{l−1}a_{l−1}ᵀ + εI)⁻¹.
void weight_update(NetworkState& state, std::size_t l, double rel_ridge);

/// a_l ← (β_{l+1}W_{l+1}ᵀW_{l+1} + γ_l I)⁻¹(β_{l+1}W_{l+1}ᵀz_{l+1} + γ_l h_l(z_l)).
void activation_update(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                       std::size_t l);

/// Entrywise global minimizer of γ_l(a_l − h(z))² + β_l(z − W_l a_{l−1})².
void output_update(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                   std::size_t l);

/// Entrywise minimizer of hinge(z, y) + λz + β_L(z − W_L a_{L−1})².
void output_update_final(NetworkState& state, const Hyperparams& hp);

/// λ ← λ + 2β_L(z_L − W_L a_{L−1}), the gradient of the β_L‖z_L − W_L a_{L−1}‖² penalty.
/// With this step every entry of λ lands in −∂hinge(z_L).
void lagrange_update(NetworkState& state, const Hyperparams& hp);

/// One sweep: for each hidden layer W, a, z in turn; then W_L, z_L and optionally λ.
void admm_iteration(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                    bool update_lambda);

/// Per-layer pieces of the augmented objective, summed over entries.
struct ObjectiveTerms {
  double loss = 0.0;         ///< Σ hinge(z_L, y)
  double multiplier = 0.0;   ///< ⟨z_L, λ⟩
  double penalty = 0.0;      ///< Σ_l β_l‖z_l − W_l a_{l−1}‖² + γ_l‖a_l − h_l(z_l)‖²

  double total() const noexcept { return loss + multiplier + penalty; }
};

ObjectiveTerms objective_terms(const NetworkState& state, const Architecture& arch,
                               const Hyperparams& hp);
double objective(const NetworkState& state, const Architecture& arch, const Hyperparams& hp);

/// Forward pass followed by row-argmax; the lowest row wins ties.
std::vector<std::size_t> predict(const std::vector<Matrix>& weights, const Matrix& x,
                                 const Architecture& arch);

/// Number of columns of `x` whose prediction matches the one-hot `labels`.
std::size_t count_correct(const std::vector<Matrix>& weights, const Matrix& x,
                          const Matrix& labels, const Architecture& arch);

double accuracy(const std::vector<Matrix>& weights, const Dataset& data, const Architecture& arch);

/// Warm start (λ frozen) for hp.warmup_iters, then hp.train_iters full iterations.
TrainResult train(const Dataset& data, const Architecture& arch, const Hyperparams& hp,
                  const TrainOptions& options = {});

}  // namespace admm
