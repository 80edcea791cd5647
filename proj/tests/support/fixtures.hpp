#pragma once

#include "admm/network.hpp"

#include <memory>
#include <random>
#include <vector>

namespace admm::testing {

/// Hand-built state; outputs and hidden activations are given directly.
inline NetworkState make_state(const Matrix& input, const Matrix& labels, std::vector<Matrix> hidden,
                               std::vector<Matrix> outputs) {
  NetworkState s;
  s.input = std::make_shared<const Matrix>(input);
  s.labels = std::make_shared<const Matrix>(labels);
  s.input_gram = std::make_shared<const Matrix>(gram(input));
  s.hidden = std::move(hidden);
  s.outputs = std::move(outputs);
  s.weights.resize(s.outputs.size());
  s.lambda = Matrix::Zero(s.outputs.back().rows(), input.cols());
  return s;
}

/// Binary labels in a d × n matrix, not necessarily one-hot.
inline Dataset random_binary_dataset(std::size_t features, std::size_t outputs, std::size_t n,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = normal(rng);
  d.labels.resize(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.labels.size(); ++i) d.labels.data()[i] = static_cast<double>(rng() % 2);
  return d;
}

}  // namespace admm::testing
