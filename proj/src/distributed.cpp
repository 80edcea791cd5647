#include "admm/distributed.hpp"

#include "admm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <thread>

namespace admm {

using wire::ControlCommand;
using wire::MessageKind;

std::vector<ShardRange> shard_ranges(std::size_t samples, std::size_t workers) {
  if (workers == 0) throw InvalidArgument("need at least one worker");
  if (workers > samples) {
    throw InvalidArgument(std::to_string(workers) + " workers exceed " + std::to_string(samples) +
                          " samples");
  }
  std::vector<ShardRange> out;
  const std::size_t base = samples / workers;
  const std::size_t extra = samples % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t count = base + (w < extra ? 1 : 0);
    out.push_back({begin, count});
    begin += count;
  }
  return out;
}

std::vector<Dataset> shard_dataset(const Dataset& data, std::size_t workers) {
  std::vector<Dataset> out;
  for (const auto& r : shard_ranges(data.samples(), workers)) {
    out.push_back(slice_columns(data, r.begin, r.count));
  }
  return out;
}

GramContribution local_gram_contribution(const NetworkState& shard, std::size_t l,
                                         std::uint16_t worker, std::uint32_t iteration) {
  if (l < 1 || l > shard.layers()) throw InvalidArgument("local_gram_contribution: layer out of range");
  GramContribution c;
  c.iteration = iteration;
  c.layer = static_cast<std::uint16_t>(l);
  c.worker = worker;
  const Matrix& a = shard.activation(l - 1);
  const Matrix& z = shard.output(l);
  if (a.cols() == 0) {
    c.cross = Matrix::Zero(z.rows(), a.rows());
    c.gram = Matrix::Zero(a.rows(), a.rows());
    return c;
  }
  c.cross = cross_gram(z, a);
  c.gram = shard.activation_gram(l);
  return c;
}

wire::Bytes encode(const GramContribution& c) {
  std::vector<double> payload = wire::flatten(c.cross);
  payload.insert(payload.end(), c.gram.data(), c.gram.data() + c.gram.size());
  return wire::encode({c.iteration, c.layer, MessageKind::gram_contribution, c.worker}, payload);
}

GramContribution decode_gram_contribution(const wire::Frame& frame, std::size_t rows,
                                          std::size_t cols) {
  if (frame.header.kind != MessageKind::gram_contribution) {
    throw ProtocolError("expected a gram contribution frame");
  }
  const std::size_t cross_count = rows * cols;
  if (frame.payload.size() != cross_count + cols * cols) {
    throw ProtocolError("gram contribution from worker " + std::to_string(frame.header.worker) +
                        " has " + std::to_string(frame.payload.size()) + " values");
  }
  GramContribution c;
  c.iteration = frame.header.iteration;
  c.layer = frame.header.layer;
  c.worker = frame.header.worker;
  const std::span<const double> values(frame.payload);
  c.cross = wire::unflatten(values.first(cross_count), rows, cols);
  c.gram = wire::unflatten(values.subspan(cross_count), cols, cols);
  return c;
}

Matrix reduce_and_solve(std::vector<GramContribution> contribs, double rel_ridge,
                        std::size_t expected_workers) {
  if (contribs.empty()) throw ProtocolError("no gram contributions to reduce");
  std::sort(contribs.begin(), contribs.end(),
            [](const auto& a, const auto& b) { return a.worker < b.worker; });
  const auto iteration = contribs.front().iteration;
  const auto layer = contribs.front().layer;
  for (std::size_t w = 0; w < expected_workers; ++w) {
    if (w >= contribs.size() || contribs[w].worker != w) {
      throw ProtocolError("missing gram contribution from worker " + std::to_string(w) +
                          " for iteration " + std::to_string(iteration) + " layer " +
                          std::to_string(layer));
    }
  }
  if (contribs.size() != expected_workers) {
    throw ProtocolError("unexpected gram contribution from worker " +
                        std::to_string(contribs.back().worker));
  }
  Matrix cross = contribs.front().cross;
  Matrix g = contribs.front().gram;
  for (std::size_t w = 1; w < contribs.size(); ++w) {
    const auto& c = contribs[w];
    if (c.iteration != iteration || c.layer != layer) {
      throw ProtocolError("stale gram contribution from worker " + std::to_string(c.worker));
    }
    if (c.cross.rows() != cross.rows() || c.cross.cols() != cross.cols() || c.gram.rows() != g.rows()) {
      throw ProtocolError("gram contribution shape mismatch from worker " + std::to_string(c.worker));
    }
    cross += c.cross;
    g += c.gram;
  }
  return solve_right(cross, ridge_factor(g, rel_ridge));
}

InProcessTransport::InProcessTransport(std::size_t workers) : worker_inboxes_(workers) {}

void InProcessTransport::record(const wire::Bytes& frame, bool to_coordinator) {
  const wire::Frame f = wire::decode(frame);
  std::lock_guard lock(mutex_);
  log_.push_back({f.header, to_coordinator, wire::payload_bytes(frame), frame.size()});
}

void InProcessTransport::send_to_coordinator(wire::Bytes frame) {
  record(frame, true);
  coordinator_inbox_.push(std::move(frame));
}

void InProcessTransport::send_to_worker(std::size_t worker, wire::Bytes frame) {
  record(frame, false);
  worker_inboxes_.at(worker).push(std::move(frame));
}

void InProcessTransport::broadcast(const wire::Bytes& frame) {
  for (std::size_t w = 0; w < worker_inboxes_.size(); ++w) send_to_worker(w, frame);
}

wire::Bytes InProcessTransport::receive_at_coordinator() {
  auto frame = coordinator_inbox_.pop();
  if (!frame) {
    std::lock_guard lock(mutex_);
    throw ProtocolError(failure_.empty() ? "transport shut down" : failure_);
  }
  return std::move(*frame);
}

std::optional<wire::Bytes> InProcessTransport::receive_at_worker(std::size_t worker) {
  return worker_inboxes_.at(worker).pop();
}

void InProcessTransport::report_failure(std::size_t worker, const std::string& what) {
  {
    std::lock_guard lock(mutex_);
    if (failure_.empty()) failure_ = "worker " + std::to_string(worker) + " failed: " + what;
  }
  coordinator_inbox_.close();
}

void InProcessTransport::shutdown() {
  coordinator_inbox_.close();
  for (auto& inbox : worker_inboxes_) inbox.close();
}

std::vector<MessageRecord> InProcessTransport::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

namespace {

wire::Bytes control_frame(std::uint32_t iteration, std::uint16_t worker, ControlCommand cmd) {
  const double payload[1] = {static_cast<double>(cmd)};
  return wire::encode({iteration, 0, MessageKind::control, worker}, payload);
}

ControlCommand control_command(const wire::Frame& f) {
  if (f.header.kind != MessageKind::control || f.payload.size() != 1) {
    throw ProtocolError("expected a control frame");
  }
  return static_cast<ControlCommand>(static_cast<std::uint8_t>(f.payload[0]));
}

void expect(const wire::Frame& f, MessageKind kind, std::uint32_t iteration, std::uint16_t layer) {
  if (f.header.kind != kind) {
    throw ProtocolError("worker " + std::to_string(f.header.worker) + " sent message kind " +
                        std::to_string(static_cast<int>(f.header.kind)) + ", expected " +
                        std::to_string(static_cast<int>(kind)));
  }
  if (f.header.iteration != iteration || f.header.layer != layer) {
    throw ProtocolError("stale message from worker " + std::to_string(f.header.worker) +
                        ": iteration " + std::to_string(f.header.iteration) + " layer " +
                        std::to_string(f.header.layer) + ", expected iteration " +
                        std::to_string(iteration) + " layer " + std::to_string(layer));
  }
}

class Worker {
 public:
  Worker(std::size_t id, NetworkState state, const Architecture& arch, const Hyperparams& hp,
         InProcessTransport& transport)
      : id_(static_cast<std::uint16_t>(id)), state_(std::move(state)), arch_(arch), hp_(hp),
        transport_(transport) {}

  void run() {
    try {
      loop();
    } catch (const std::exception& e) {
      transport_.report_failure(id_, e.what());
    }
  }

 private:
  wire::Frame receive() {
    auto bytes = transport_.receive_at_worker(id_);
    if (!bytes) throw ProtocolError("coordinator closed the connection");
    return wire::decode(*bytes);
  }

  void loop() {
    const std::size_t L = arch_.layers();
    while (true) {
      const wire::Frame start = receive();
      const auto cmd = control_command(start);
      if (cmd == ControlCommand::stop) return;
      if (cmd != ControlCommand::proceed) throw ProtocolError("unexpected control command");
      const std::uint32_t k = start.header.iteration;

      for (std::size_t l = 1; l <= L; ++l) {
        transport_.send_to_coordinator(encode(local_gram_contribution(state_, l, id_, k)));
        const wire::Frame wf = receive();
        expect(wf, MessageKind::weight_broadcast, k, static_cast<std::uint16_t>(l));
        state_.weights[l - 1] = wire::unflatten(wf.payload, arch_.dims[l], arch_.dims[l - 1]);
        if (l < L) {
          activation_update(state_, arch_, hp_, l);
          output_update(state_, arch_, hp_, l);
        } else {
          output_update_final(state_, hp_);
          if (k >= hp_.warmup_iters) lagrange_update(state_, hp_);
        }
      }
      transport_.send_to_coordinator(control_frame(k, id_, ControlCommand::done));

      const wire::Frame rf = receive();
      if (control_command(rf) != ControlCommand::report || rf.header.iteration != k) {
        throw ProtocolError("expected a report request for iteration " + std::to_string(k));
      }
      const ObjectiveTerms terms = objective_terms(state_, arch_, hp_);
      const auto correct = count_correct(state_.weights, *state_.input, *state_.labels, arch_);
      const double payload[4] = {terms.loss, terms.multiplier, terms.penalty,
                                 static_cast<double>(correct)};
      transport_.send_to_coordinator(wire::encode({k, 0, MessageKind::metrics, id_}, payload));
    }
  }

  std::uint16_t id_;
  NetworkState state_;
  const Architecture& arch_;
  const Hyperparams& hp_;
  InProcessTransport& transport_;
};

/// Gathers one frame from every worker, indexed by worker id.
std::vector<wire::Frame> gather(InProcessTransport& transport, MessageKind kind,
                                std::uint32_t iteration, std::uint16_t layer) {
  const std::size_t n = transport.workers();
  std::vector<std::optional<wire::Frame>> slots(n);
  for (std::size_t i = 0; i < n; ++i) {
    wire::Frame f = wire::decode(transport.receive_at_coordinator());
    expect(f, kind, iteration, layer);
    const std::size_t w = f.header.worker;
    if (w >= n || slots[w]) throw ProtocolError("duplicate or unknown worker id " + std::to_string(w));
    slots[w] = std::move(f);
  }
  std::vector<wire::Frame> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

DistributedResult distributed_train(const Dataset& data, const Architecture& arch,
                                    const Hyperparams& hp, std::size_t workers,
                                    const TrainOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto ranges = shard_ranges(data.samples(), workers);
  if (workers > 65535) throw InvalidArgument("worker ids are 16-bit");

  InProcessTransport transport(workers);
  std::vector<std::thread> threads;
  std::vector<std::unique_ptr<Worker>> pool;
  {
    const NetworkState full = init_state(arch, data, hp);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.push_back(std::make_unique<Worker>(
          w, slice_state(full, ranges[w].begin, ranges[w].count), arch, hp, transport));
    }
  }
  for (auto& worker : pool) threads.emplace_back([&worker] { worker->run(); });

  DistributedResult result;
  result.weights.resize(arch.layers());
  const std::size_t L = arch.layers();
  const std::size_t total = hp.warmup_iters + hp.train_iters;
  std::exception_ptr error;
  try {
    double elapsed = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      const auto iter = static_cast<std::uint32_t>(k);
      const auto start = Clock::now();
      transport.broadcast(control_frame(iter, 0, ControlCommand::proceed));
      for (std::size_t l = 1; l <= L; ++l) {
        const auto layer = static_cast<std::uint16_t>(l);
        std::vector<GramContribution> contribs;
        for (const auto& f : gather(transport, MessageKind::gram_contribution, iter, layer)) {
          contribs.push_back(decode_gram_contribution(f, arch.dims[l], arch.dims[l - 1]));
        }
        result.weights[l - 1] = reduce_and_solve(std::move(contribs), hp.ridge, workers);
        transport.broadcast(wire::encode({iter, layer, MessageKind::weight_broadcast, 0},
                                         wire::flatten(result.weights[l - 1])));
      }
      for (const auto& f : gather(transport, MessageKind::control, iter, 0)) {
        if (control_command(f) != ControlCommand::done) throw ProtocolError("expected done");
      }
      elapsed += std::chrono::duration<double>(Clock::now() - start).count();

      transport.broadcast(control_frame(iter, 0, ControlCommand::report));
      ObjectiveTerms terms;
      double correct = 0.0;
      for (const auto& f : gather(transport, MessageKind::metrics, iter, 0)) {
        if (f.payload.size() != 4) throw ProtocolError("metrics frame has wrong size");
        terms.loss += f.payload[0];
        terms.multiplier += f.payload[1];
        terms.penalty += f.payload[2];
        correct += f.payload[3];
      }
      IterationRecord rec;
      rec.iteration = k + 1;
      rec.wall_seconds = elapsed;
      rec.objective = terms.total();
      rec.train_accuracy = correct / static_cast<double>(data.samples());
      if (options.test) rec.test_accuracy = accuracy(result.weights, *options.test, arch);
      result.history.push_back(rec);
      if (options.on_iteration && !options.on_iteration(rec, result.weights)) break;
    }
    transport.broadcast(control_frame(static_cast<std::uint32_t>(total), 0, ControlCommand::stop));
  } catch (...) {
    error = std::current_exception();
    transport.shutdown();
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  result.messages = transport.log();
  return result;
}

}  // namespace admm
