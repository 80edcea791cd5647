#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace admm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Settings shared by every subcommand. Everything but the data source has a default.
struct RunConfig {
  // data
  std::string dataset;
  std::string format = "csv";
  std::string test_dataset;
  std::string synthetic;
  int label_column = -1;  ///< -1: last column
  bool header = false;
  bool normalize = true;
  std::size_t samples = 1000;
  std::size_t test_samples = 200;
  std::size_t features = 2;
  std::size_t classes = 2;
  double separation = 6.0;
  double noise = 0.1;
  // model
  std::string arch;  ///< "d0,d1,...", empty: d0,100,50,classes
  std::string activation = "relu";
  double gamma = 10.0;
  double beta = 1.0;
  std::size_t warmup = 10;
  std::size_t iters = 100;
  double ridge = 1e-8;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  // baseline
  double lr = 0.0;  ///< 0: grid search
  std::size_t batch = 32;
  std::size_t epochs = 100;
  // bench / eval / output
  double threshold = 0.95;
  std::string worker_list = "1,2,4,8";
  std::string weights;
  std::string save_weights;
  std::string out = "metrics.csv";
};

/// Reads a flat `key = value` file (`#` starts a comment) into `--key=value` arguments.
std::vector<std::string> config_file_args(const std::string& path);

/// Runs the command line; returns the process exit code.
int run(std::vector<std::string> args);

}  // namespace admm::cli
