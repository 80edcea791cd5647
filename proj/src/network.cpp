#include "admm/network.hpp"

#include "admm/errors.hpp"
#include "admm/loss.hpp"

#include <chrono>
#include <random>
#include <string>

namespace admm {

Architecture Architecture::uniform(std::vector<std::size_t> dims, Activation h) {
  Architecture arch;
  const std::size_t hidden = dims.size() >= 2 ? dims.size() - 2 : 0;
  arch.dims = std::move(dims);
  arch.activations.assign(hidden, h);
  arch.validate();
  return arch;
}

void Architecture::validate() const {
  if (dims.size() < 2) throw InvalidArgument("architecture needs at least two layer widths");
  for (const auto d : dims) {
    if (d == 0) throw InvalidArgument("architecture layer widths must be positive");
  }
  if (activations.size() != dims.size() - 2) {
    throw InvalidArgument("architecture needs one activation per hidden layer");
  }
}

Hyperparams Hyperparams::defaults(const Architecture& arch, double beta, double gamma) {
  Hyperparams hp;
  hp.beta.assign(arch.layers(), beta);
  hp.gamma.assign(arch.layers() - 1, gamma);
  return hp;
}

void Hyperparams::validate(const Architecture& arch) const {
  if (beta.size() != arch.layers()) throw InvalidArgument("need one beta per layer");
  if (gamma.size() + 1 != arch.layers()) throw InvalidArgument("need one gamma per hidden layer");
  for (const double b : beta) {
    if (!(b > 0.0)) throw InvalidArgument("beta must be positive");
  }
  for (const double g : gamma) {
    if (!(g > 0.0)) throw InvalidArgument("gamma must be positive");
  }
  if (!(ridge >= 0.0)) throw InvalidArgument("ridge must be nonnegative");
}

Matrix NetworkState::activation_gram(std::size_t l) const {
  if (l == 1 && input_gram) return *input_gram;
  return gram(activation(l - 1));
}

Matrix NetworkState::linear_prediction(std::size_t l) const {
  const Matrix& w = weight(l);
  const Matrix& a = activation(l - 1);
  if (w.size() == 0) return Matrix::Zero(output(l).rows(), a.cols());
  return w * a;
}

NetworkState init_state(const Architecture& arch, const Dataset& data, const Hyperparams& hp) {
  arch.validate();
  hp.validate(arch);
  if (data.feature_dim() != arch.dims.front()) {
    throw InvalidArgument("dataset has " + std::to_string(data.feature_dim()) +
                          " features but architecture expects " + std::to_string(arch.dims.front()));
  }
  if (data.class_count() != arch.dims.back()) {
    throw InvalidArgument("dataset has " + std::to_string(data.class_count()) +
                          " classes but architecture ends in " + std::to_string(arch.dims.back()));
  }
  const auto n = static_cast<Eigen::Index>(data.samples());
  const std::size_t layers = arch.layers();
  std::mt19937_64 rng(hp.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](std::size_t rows) {
    Matrix m(static_cast<Eigen::Index>(rows), n);
    double* p = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) p[i] = normal(rng);
    return m;
  };

  NetworkState s;
  s.input = std::make_shared<const Matrix>(data.features);
  s.labels = std::make_shared<const Matrix>(data.labels);
  s.input_gram = std::make_shared<const Matrix>(gram(data.features));
  s.weights.resize(layers);
  for (std::size_t l = 1; l < layers; ++l) s.hidden.push_back(draw(arch.dims[l]));
  for (std::size_t l = 1; l <= layers; ++l) s.outputs.push_back(draw(arch.dims[l]));
  s.lambda = Matrix::Zero(static_cast<Eigen::Index>(arch.dims.back()), n);
  return s;
}

NetworkState slice_state(const NetworkState& state, std::size_t begin, std::size_t count) {
  if (begin + count > state.samples()) throw InvalidArgument("slice_state: range out of bounds");
  const auto b = static_cast<Eigen::Index>(begin);
  const auto c = static_cast<Eigen::Index>(count);
  NetworkState s;
  auto input = std::make_shared<const Matrix>(state.input->middleCols(b, c));
  s.input_gram = std::make_shared<const Matrix>(count == 0 ? Matrix::Zero(input->rows(), input->rows())
                                                           : gram(*input));
  s.input = std::move(input);
  s.labels = std::make_shared<const Matrix>(state.labels->middleCols(b, c));
  s.weights = state.weights;
  for (const auto& a : state.hidden) s.hidden.emplace_back(a.middleCols(b, c));
  for (const auto& z : state.outputs) s.outputs.emplace_back(z.middleCols(b, c));
  s.lambda = state.lambda.middleCols(b, c);
  return s;
}

void weight_update(NetworkState& state, std::size_t l, double rel_ridge) {
  if (l < 1 || l > state.layers()) throw InvalidArgument("weight_update: layer out of range");
  const Matrix& a = state.activation(l - 1);
  const Matrix c = cross_gram(state.output(l), a);
  const SpdFactor factor = ridge_factor(state.activation_gram(l), rel_ridge);
  state.weights[l - 1] = solve_right(c, factor);
}

void activation_update(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                       std::size_t l) {
  if (l < 1 || l >= state.layers()) throw InvalidArgument("activation_update: layer out of range");
  const Activation& h = arch.activation(l);
  const double gamma = hp.gamma_at(l);
  const Matrix& w_next = state.weight(l + 1);
  if (w_next.size() == 0) {
    state.activation_mut(l) = h.apply(state.output(l));
    return;
  }
  const double beta = hp.beta_at(l + 1);
  const Matrix wt = w_next.transpose();
  const SpdFactor factor(beta * gram(wt), gamma);
  const Matrix rhs = beta * (wt * state.output(l + 1)) + gamma * h.apply(state.output(l));
  state.activation_mut(l) = solve_left(factor, rhs);
}

void output_update(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                   std::size_t l) {
  if (l < 1 || l >= state.layers()) throw InvalidArgument("output_update: layer out of range");
  const Activation& h = arch.activation(l);
  const double gamma = hp.gamma_at(l);
  const double beta = hp.beta_at(l);
  const Matrix w = state.linear_prediction(l);
  const Matrix& a = state.activation(l);
  Matrix& z = state.outputs[l - 1];
  const Eigen::Index n = z.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    z.data()[i] = solve_z(h, a.data()[i], w.data()[i], gamma, beta);
  }
}

void output_update_final(NetworkState& state, const Hyperparams& hp) {
  const std::size_t L = state.layers();
  const double beta = hp.beta_at(L);
  const Matrix w = state.linear_prediction(L);
  const Matrix& y = *state.labels;
  Matrix& z = state.outputs[L - 1];
  const Eigen::Index n = z.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    z.data()[i] = solve_zL_hinge(w.data()[i], y.data()[i], state.lambda.data()[i], beta);
  }
}

void lagrange_update(NetworkState& state, const Hyperparams& hp) {
  const std::size_t L = state.layers();
  state.lambda += (2.0 * hp.beta_at(L)) * (state.output(L) - state.linear_prediction(L));
}

void admm_iteration(NetworkState& state, const Architecture& arch, const Hyperparams& hp,
                    bool update_lambda) {
  const std::size_t L = state.layers();
  for (std::size_t l = 1; l < L; ++l) {
    weight_update(state, l, hp.ridge);
    activation_update(state, arch, hp, l);
    output_update(state, arch, hp, l);
  }
  weight_update(state, L, hp.ridge);
  output_update_final(state, hp);
  if (update_lambda) lagrange_update(state, hp);
}

ObjectiveTerms objective_terms(const NetworkState& state, const Architecture& arch,
                               const Hyperparams& hp) {
  ObjectiveTerms t;
  const std::size_t L = state.layers();
  for (std::size_t l = 1; l < L; ++l) {
    const Matrix& z = state.output(l);
    t.penalty += hp.beta_at(l) * (z - state.linear_prediction(l)).squaredNorm();
    t.penalty += hp.gamma_at(l) * (state.activation(l) - arch.activation(l).apply(z)).squaredNorm();
  }
  const Matrix& z = state.output(L);
  const Matrix& y = *state.labels;
  for (Eigen::Index i = 0; i < z.size(); ++i) t.loss += hinge(z.data()[i], y.data()[i]);
  t.multiplier = z.cwiseProduct(state.lambda).sum();
  t.penalty += hp.beta_at(L) * (z - state.linear_prediction(L)).squaredNorm();
  return t;
}

double objective(const NetworkState& state, const Architecture& arch, const Hyperparams& hp) {
  return objective_terms(state, arch, hp).total();
}

namespace {

Matrix forward_scores(const std::vector<Matrix>& weights, const Matrix& x, const Architecture& arch) {
  if (static_cast<std::size_t>(x.rows()) != arch.dims.front()) {
    throw DimensionMismatch("predict: input has " + std::to_string(x.rows()) + " features, expected " +
                            std::to_string(arch.dims.front()));
  }
  const std::size_t L = arch.layers();
  if (weights.size() != L) throw DimensionMismatch("predict: weight count differs from layer count");
  Matrix a = x;
  for (std::size_t l = 1; l <= L; ++l) {
    const Matrix& w = weights[l - 1];
    Matrix z = w.size() == 0 ? Matrix::Zero(static_cast<Eigen::Index>(arch.dims[l]), a.cols())
                             : Matrix(w * a);
    a = l < L ? arch.activation(l).apply(z) : std::move(z);
  }
  return a;
}

}  // namespace

std::vector<std::size_t> predict(const std::vector<Matrix>& weights, const Matrix& x,
                                 const Architecture& arch) {
  const Matrix scores = forward_scores(weights, x, arch);
  std::vector<std::size_t> out(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.rows(); ++i) {
      if (scores(i, j) > scores(best, j)) best = i;
    }
    out[static_cast<std::size_t>(j)] = static_cast<std::size_t>(best);
  }
  return out;
}

std::size_t count_correct(const std::vector<Matrix>& weights, const Matrix& x,
                          const Matrix& labels, const Architecture& arch) {
  const auto pred = predict(weights, x, arch);
  std::size_t correct = 0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (labels(static_cast<Eigen::Index>(pred[j]), static_cast<Eigen::Index>(j)) == 1.0) ++correct;
  }
  return correct;
}

double accuracy(const std::vector<Matrix>& weights, const Dataset& data, const Architecture& arch) {
  if (data.samples() == 0) return 0.0;
  return static_cast<double>(count_correct(weights, data.features, data.labels, arch)) /
         static_cast<double>(data.samples());
}

TrainResult train(const Dataset& data, const Architecture& arch, const Hyperparams& hp,
                  const TrainOptions& options) {
  using Clock = std::chrono::steady_clock;
  NetworkState state = init_state(arch, data, hp);
  TrainResult result;
  const std::size_t total = hp.warmup_iters + hp.train_iters;
  double elapsed = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    const auto start = Clock::now();
    admm_iteration(state, arch, hp, k >= hp.warmup_iters);
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();

    IterationRecord rec;
    rec.iteration = k + 1;
    rec.wall_seconds = elapsed;
    rec.objective = objective(state, arch, hp);
    rec.train_accuracy = accuracy(state.weights, data, arch);
    if (options.test) rec.test_accuracy = accuracy(state.weights, *options.test, arch);
    result.history.push_back(rec);
    if (options.on_iteration && !options.on_iteration(rec, state.weights)) break;
  }
  result.weights = std::move(state.weights);
  return result;
}

}  // namespace admm
