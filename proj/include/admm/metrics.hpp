#pragma once

#include "admm/data.hpp"
#include "admm/linalg.hpp"

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace admm {

/// One row of a training history.
struct IterationRecord {
  std::size_t iteration = 0;  ///< 1-based
  double wall_seconds = 0.0;  ///< cumulative optimization time, excluding metric evaluation
  double objective = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

using History = std::vector<IterationRecord>;

/// Called after every iteration with the current weights; returning false stops training.
using IterationCallback = std::function<bool(const IterationRecord&, const std::vector<Matrix>&)>;

struct TrainOptions {
  const Dataset* test = nullptr;
  IterationCallback on_iteration;
};

struct TrainResult {
  std::vector<Matrix> weights;
  History history;
};

inline constexpr const char* kMetricsHeader = "iter,wall_seconds,objective,train_acc,test_acc";
inline constexpr const char* kCompareHeader = "method,iter,wall_seconds,objective,train_acc,test_acc";

std::string format_metrics_row(const IterationRecord& row);

/// Appends rows to a metrics CSV as they are produced, flushing after each one.
class MetricsWriter {
 public:
  /// With `with_method` set the file gets the leading `method` column.
  MetricsWriter(const std::filesystem::path& path, bool with_method = false);

  void append(const IterationRecord& row, const std::string& method = {});

 private:
  std::ofstream out_;
  bool with_method_;
};

struct MetricsFile {
  std::vector<std::string> methods;  ///< empty unless the file has a method column
  History rows;
};

/// Reads either metrics schema back. Throws ParseError on malformed content.
MetricsFile read_metrics_csv(const std::filesystem::path& path);

}  // namespace admm
