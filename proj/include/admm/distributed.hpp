#pragma once

#include "admm/data.hpp"
#include "admm/linalg.hpp"
#include "admm/metrics.hpp"
#include "admm/network.hpp"
#include "admm/wire.hpp"

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace admm {

/// Contiguous column block [begin, begin + count).
struct ShardRange {
  std::size_t begin = 0;
  std::size_t count = 0;
};

/// Sizes differ by at most one; earlier shards take the remainder.
std::vector<ShardRange> shard_ranges(std::size_t samples, std::size_t workers);

std::vector<Dataset> shard_dataset(const Dataset& data, std::size_t workers);

/// Worker-local partial sums for the layer-l weight solve.
struct GramContribution {
  std::uint32_t iteration = 0;
  std::uint16_t layer = 0;
  std::uint16_t worker = 0;
  Matrix cross;  ///< z_lⁿ(a_{l−1}ⁿ)ᵀ, d_l × d_{l−1}
  Matrix gram;   ///< a_{l−1}ⁿ(a_{l−1}ⁿ)ᵀ, d_{l−1} × d_{l−1}
};

GramContribution local_gram_contribution(const NetworkState& shard, std::size_t l,
                                         std::uint16_t worker = 0, std::uint32_t iteration = 0);

wire::Bytes encode(const GramContribution& c);
GramContribution decode_gram_contribution(const wire::Frame& frame, std::size_t rows,
                                          std::size_t cols);

/// W_l = (Σ Cₙ)(Σ Gₙ + εI)⁻¹, summed in worker-id order. Contributions must cover workers
/// 0…expected_workers−1 exactly once for one (iteration, layer).
Matrix reduce_and_solve(std::vector<GramContribution> contribs, double rel_ridge,
                        std::size_t expected_workers);

/// Blocking FIFO between threads. pop() returns nullopt once closed and drained.
template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  bool closed_ = false;
};

/// One frame that crossed the transport.
struct MessageRecord {
  wire::Header header;
  bool to_coordinator = false;
  std::size_t payload_bytes = 0;
  std::size_t frame_bytes = 0;
};

/// In-memory transport: one inbox for the coordinator and one per worker. Every frame is
/// logged. A worker failure closes the coordinator inbox with a diagnostic.
class InProcessTransport {
 public:
  explicit InProcessTransport(std::size_t workers);

  std::size_t workers() const noexcept { return worker_inboxes_.size(); }

  void send_to_coordinator(wire::Bytes frame);
  void send_to_worker(std::size_t worker, wire::Bytes frame);
  void broadcast(const wire::Bytes& frame);

  /// Throws ProtocolError if the transport was shut down or a worker failed.
  wire::Bytes receive_at_coordinator();
  /// Returns nullopt once the transport is shut down.
  std::optional<wire::Bytes> receive_at_worker(std::size_t worker);

  void report_failure(std::size_t worker, const std::string& what);
  void shutdown();

  std::vector<MessageRecord> log() const;

 private:
  void record(const wire::Bytes& frame, bool to_coordinator);

  Channel<wire::Bytes> coordinator_inbox_;
  std::vector<Channel<wire::Bytes>> worker_inboxes_;
  mutable std::mutex mutex_;
  std::vector<MessageRecord> log_;
  std::string failure_;
};

struct DistributedResult : TrainResult {
  std::vector<MessageRecord> messages;
};

/// Data-parallel training over `workers` threads. Initial Gaussians are drawn once in
/// single-node order and sliced, so iterates match train() up to summation order.
DistributedResult distributed_train(const Dataset& data, const Architecture& arch,
                                    const Hyperparams& hp, std::size_t workers,
                                    const TrainOptions& options = {});

}  // namespace admm
