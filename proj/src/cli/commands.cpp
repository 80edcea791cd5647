#include "admm/cli/commands.hpp"

#include "admm/data.hpp"
#include "admm/distributed.hpp"
#include "admm/errors.hpp"
#include "admm/metrics.hpp"
#include "admm/network.hpp"
#include "admm/sgd.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#ifndef ADMM_GIT_REV
#define ADMM_GIT_REV "unknown"
#endif

namespace admm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (item.empty() || pos != item.size()) {
      throw ConfigError(std::string("bad ") + what + " entry '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

struct Prepared {
  Dataset train;
  std::optional<Dataset> test;
  std::optional<NormalizeTransform> transform;
  Architecture arch;
};

std::size_t count_csv_columns(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  }
  return 0;
}

Dataset load_file(const RunConfig& cfg, const std::string& path,
                  const std::optional<std::vector<double>>& classes, std::size_t feature_dim = 0) {
  if (!fs::exists(path)) throw ConfigError("dataset '" + path + "' does not exist");
  if (cfg.format == "libsvm") return load_libsvm(path, feature_dim, classes);
  if (cfg.format != "csv") throw ConfigError("unknown format '" + cfg.format + "' (csv or libsvm)");
  std::size_t label_column = 0;
  if (cfg.label_column < 0) {
    const std::size_t cols = count_csv_columns(path);
    if (cols < 2) throw ConfigError("dataset '" + path + "' needs at least two columns");
    label_column = cols - 1;
  } else {
    label_column = static_cast<std::size_t>(cfg.label_column);
  }
  return load_csv(path, label_column, cfg.header, classes);
}

Architecture resolve_arch(const RunConfig& cfg, std::size_t d0, std::size_t classes) {
  std::vector<std::size_t> dims =
      cfg.arch.empty() ? std::vector<std::size_t>{d0, 100, 50, classes} : parse_list(cfg.arch, "arch");
  if (dims.size() < 2) throw ConfigError("arch needs at least two widths");
  if (dims.front() != d0) {
    throw ConfigError("arch starts with " + std::to_string(dims.front()) + " but data has " +
                      std::to_string(d0) + " features");
  }
  if (dims.back() != classes) {
    throw ConfigError("arch ends with " + std::to_string(dims.back()) + " but data has " +
                      std::to_string(classes) + " classes");
  }
  return Architecture::uniform(std::move(dims), Activation::from_name(cfg.activation));
}

Prepared prepare_unchecked(const RunConfig& cfg) {
  Prepared p;
  const bool have_file = !cfg.dataset.empty();
  const bool have_synth = !cfg.synthetic.empty();
  if (have_file == have_synth) throw ConfigError("specify exactly one of --dataset or --synthetic");
  if (have_synth) {
    const std::size_t total = cfg.samples + cfg.test_samples;
    Dataset all;
    if (cfg.synthetic == "blobs") {
      std::size_t features = cfg.features;
      if (!cfg.arch.empty()) features = parse_list(cfg.arch, "arch").front();
      all = gen_blobs(total, features, cfg.classes, cfg.separation, cfg.seed);
    } else if (cfg.synthetic == "xor") {
      all = gen_xor(total, cfg.noise, cfg.seed);
    } else {
      throw ConfigError("unknown synthetic dataset '" + cfg.synthetic + "' (blobs or xor)");
    }
    auto [train, test] = split(all, cfg.samples);
    p.train = std::move(train);
    if (test.samples() > 0) p.test = std::move(test);
  } else {
    p.train = load_file(cfg, cfg.dataset, std::nullopt);
    if (!cfg.test_dataset.empty()) {
      p.test = load_file(cfg, cfg.test_dataset, p.train.classes, p.train.feature_dim());
    }
  }
  p.train.validate();
  if (cfg.normalize) {
    auto [train, transform] = normalize(p.train);
    p.train = std::move(train);
    if (p.test) p.test = transform.apply(*p.test);
    p.transform = std::move(transform);
  }
  p.arch = resolve_arch(cfg, p.train.feature_dim(), p.train.class_count());
  return p;
}

/// Runs `fn`, reporting any failure as a configuration error.
template <typename Fn>
auto as_config(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

Prepared prepare(const RunConfig& cfg) {
  return as_config([&] { return prepare_unchecked(cfg); });
}

Hyperparams make_hyperparams_unchecked(const RunConfig& cfg, const Architecture& arch) {
  Hyperparams hp = Hyperparams::defaults(arch, cfg.beta, cfg.gamma);
  hp.warmup_iters = cfg.warmup;
  hp.train_iters = cfg.iters;
  hp.ridge = cfg.ridge;
  hp.seed = cfg.seed;
  hp.validate(arch);
  if (cfg.workers == 0) throw ConfigError("--workers must be at least 1");
  return hp;
}

Hyperparams make_hyperparams(const RunConfig& cfg, const Architecture& arch) {
  return as_config([&] { return make_hyperparams_unchecked(cfg, arch); });
}

SgdConfig make_sgd(const RunConfig& cfg) {
  return as_config([&] {
  SgdConfig s;
  s.learning_rate = cfg.lr;
  s.batch_size = cfg.batch;
  s.epochs = cfg.epochs;
  s.seed = cfg.seed;
  s.validate();
  return s;
  });
}

json config_json(const RunConfig& c) {
  return {{"dataset", c.dataset}, {"format", c.format}, {"test_dataset", c.test_dataset},
          {"synthetic", c.synthetic}, {"samples", c.samples}, {"test_samples", c.test_samples},
          {"features", c.features}, {"classes", c.classes}, {"separation", c.separation},
          {"noise", c.noise}, {"normalize", c.normalize}, {"arch", c.arch},
          {"activation", c.activation}, {"gamma", c.gamma}, {"beta", c.beta},
          {"warmup", c.warmup}, {"iters", c.iters}, {"ridge", c.ridge}, {"workers", c.workers},
          {"seed", c.seed}, {"lr", c.lr}, {"batch", c.batch}, {"epochs", c.epochs},
          {"threshold", c.threshold}};
}

fs::path summary_path(const fs::path& out) {
  if (out.extension() == ".json") return fs::path(out.string() + ".summary.json");
  fs::path p = out;
  return p.replace_extension(".json");
}

json history_summary(const History& h) {
  json s = {{"iterations", h.size()}};
  if (!h.empty()) {
    s["total_seconds"] = h.back().wall_seconds;
    s["final_objective"] = h.back().objective;
    s["final_train_accuracy"] = h.back().train_accuracy;
    s["final_test_accuracy"] = h.back().test_accuracy ? json(*h.back().test_accuracy) : json(nullptr);
  }
  return s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void save_weights(const fs::path& path, const std::vector<Matrix>& weights, const Prepared& p) {
  json layers = json::array();
  for (const auto& w : weights) {
    layers.push_back({{"rows", w.rows()}, {"cols", w.cols()},
                      {"values", std::vector<double>(w.data(), w.data() + w.size())}});
  }
  json j = {{"dims", p.arch.dims},
            {"activation", p.arch.activations.empty() ? "relu" : p.arch.activations.front().name()},
            {"classes", p.train.classes},
            {"weights", layers}};
  if (p.transform) j["normalize"] = {{"mean", p.transform->mean}, {"scale", p.transform->scale}};
  write_json(path, j);
}

json stamp() { return {{"version", kVersion}, {"git", ADMM_GIT_REV}}; }

IterationCallback echo_progress(const char* method, MetricsWriter& writer, bool with_method) {
  return [method, &writer, with_method](const IterationRecord& r, const std::vector<Matrix>&) {
    writer.append(r, with_method ? method : std::string());
    return true;
  };
}

TrainResult run_admm(const Prepared& p, const Hyperparams& hp, std::size_t workers,
                     const TrainOptions& options) {
  if (workers == 1) return train(p.train, p.arch, hp, options);
  return distributed_train(p.train, p.arch, hp, workers, options);
}

int cmd_train(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Hyperparams hp = make_hyperparams(cfg, p.arch);
  MetricsWriter writer = as_config([&] { return MetricsWriter(cfg.out); });
  TrainOptions options;
  options.test = p.test ? &*p.test : nullptr;
  options.on_iteration = echo_progress("admm", writer, false);
  const TrainResult r = run_admm(p, hp, cfg.workers, options);
  json summary = history_summary(r.history);
  summary["method"] = "admm";
  summary["config"] = config_json(cfg);
  summary["build"] = stamp();
  write_json(summary_path(cfg.out), summary);
  if (!cfg.save_weights.empty()) save_weights(cfg.save_weights, r.weights, p);
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

double pick_learning_rate(const RunConfig& cfg, const Prepared& p, const SgdConfig& sgd) {
  if (cfg.lr > 0.0) return cfg.lr;
  static constexpr double kGrid[] = {0.3, 0.1, 0.03, 0.01};
  return sgd_search_learning_rate(p.train, p.arch, sgd, kGrid);
}

int cmd_train_sgd(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  SgdConfig sgd = make_sgd(cfg);
  sgd.learning_rate = pick_learning_rate(cfg, p, sgd);
  MetricsWriter writer = as_config([&] { return MetricsWriter(cfg.out); });
  TrainOptions options;
  options.test = p.test ? &*p.test : nullptr;
  options.on_iteration = echo_progress("sgd", writer, false);
  const TrainResult r = sgd_train(p.train, p.arch, sgd, options);
  json summary = history_summary(r.history);
  summary["method"] = "sgd";
  summary["learning_rate"] = sgd.learning_rate;
  summary["config"] = config_json(cfg);
  summary["build"] = stamp();
  write_json(summary_path(cfg.out), summary);
  if (!cfg.save_weights.empty()) save_weights(cfg.save_weights, r.weights, p);
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Hyperparams hp = make_hyperparams(cfg, p.arch);
  SgdConfig sgd = make_sgd(cfg);
  sgd.learning_rate = pick_learning_rate(cfg, p, sgd);
  MetricsWriter writer = as_config([&] { return MetricsWriter(cfg.out, true); });
  TrainOptions options;
  options.test = p.test ? &*p.test : nullptr;
  options.on_iteration = echo_progress("admm", writer, true);
  const TrainResult admm = run_admm(p, hp, cfg.workers, options);
  options.on_iteration = echo_progress("sgd", writer, true);
  const TrainResult base = sgd_train(p.train, p.arch, sgd, options);
  json summary = {{"admm", history_summary(admm.history)},
                  {"sgd", history_summary(base.history)},
                  {"sgd_learning_rate", sgd.learning_rate},
                  {"config", config_json(cfg)},
                  {"build", stamp()}};
  write_json(summary_path(cfg.out), summary);
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int cmd_bench_scaling(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Hyperparams hp = make_hyperparams(cfg, p.arch);
  const auto workers = parse_list(cfg.worker_list, "worker list");
  for (const auto n : workers) {
    if (n == 0 || n > p.train.samples()) throw ConfigError("worker count out of range");
  }
  std::ofstream out(cfg.out);
  if (!out) throw ConfigError("cannot write '" + cfg.out + "'");
  out << "workers,seconds_to_threshold,iterations\n" << std::flush;
  json rows = json::array();
  for (const auto n : workers) {
    std::optional<double> reached;
    std::size_t iterations = 0;
    TrainOptions options;
    options.test = p.test ? &*p.test : nullptr;
    options.on_iteration = [&](const IterationRecord& r, const std::vector<Matrix>&) {
      iterations = r.iteration;
      const double acc = r.test_accuracy ? *r.test_accuracy : r.train_accuracy;
      if (acc >= cfg.threshold) {
        reached = r.wall_seconds;
        return false;
      }
      return true;
    };
    distributed_train(p.train, p.arch, hp, n, options);
    out << n << ',';
    if (reached) out << *reached;
    out << ',' << iterations << '\n' << std::flush;
    rows.push_back({{"workers", n},
                    {"seconds_to_threshold", reached ? json(*reached) : json(nullptr)},
                    {"iterations", iterations}});
  }
  write_json(summary_path(cfg.out),
             {{"rows", rows}, {"config", config_json(cfg)}, {"build", stamp()}});
  std::cout << rows.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.weights.empty()) throw ConfigError("eval needs --weights");
  if (!fs::exists(cfg.weights)) throw ConfigError("weights file '" + cfg.weights + "' does not exist");
  json j;
  try {
    std::ifstream in(cfg.weights);
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad weights file: ") + e.what());
  }
  Architecture arch;
  std::vector<Matrix> weights;
  std::vector<double> classes;
  std::optional<NormalizeTransform> transform;
  try {
    arch = Architecture::uniform(j.at("dims").get<std::vector<std::size_t>>(),
                                 Activation::from_name(j.at("activation").get<std::string>()));
    classes = j.at("classes").get<std::vector<double>>();
    for (const auto& layer : j.at("weights")) {
      const auto values = layer.at("values").get<std::vector<double>>();
      weights.push_back(make_matrix(layer.at("rows").get<std::size_t>(),
                                    layer.at("cols").get<std::size_t>(), values));
    }
    if (j.contains("normalize")) {
      transform = NormalizeTransform{j["normalize"].at("mean").get<std::vector<double>>(),
                                     j["normalize"].at("scale").get<std::vector<double>>()};
    }
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad weights file: ") + e.what());
  }
  Dataset data;
  if (!cfg.synthetic.empty()) {
    RunConfig synth = cfg;
    synth.arch = std::to_string(arch.dims.front()) + "," + std::to_string(arch.dims.back());
    synth.normalize = false;
    data = prepare(synth).test.value_or(Dataset{});
  } else {
    if (cfg.dataset.empty()) throw ConfigError("specify --dataset or --synthetic");
    data = as_config([&] { return load_file(cfg, cfg.dataset, classes, arch.dims.front()); });
  }
  if (transform) data = transform->apply(data);
  if (data.samples() == 0) throw ConfigError("no samples to evaluate");
  if (data.feature_dim() != arch.dims.front()) throw ConfigError("feature count differs from weights");
  const json result = {{"accuracy", accuracy(weights, data, arch)}, {"samples", data.samples()}};
  std::cout << result.dump() << '\n';
  return kExitOk;
}

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--dataset", c.dataset, "Training data file");
  app.add_option("--format", c.format, "csv or libsvm");
  app.add_option("--test-dataset", c.test_dataset, "Held-out data file");
  app.add_option("--synthetic", c.synthetic, "blobs or xor");
  app.add_option("--label-column", c.label_column, "CSV label column (default: last)");
  app.add_flag("--header", c.header, "CSV has a header row");
  app.add_flag("--normalize,!--no-normalize", c.normalize, "Standardize features");
  app.add_option("--samples", c.samples, "Synthetic training samples");
  app.add_option("--test-samples", c.test_samples, "Synthetic test samples");
  app.add_option("--features", c.features, "Synthetic blob feature count");
  app.add_option("--classes", c.classes, "Synthetic blob class count");
  app.add_option("--separation", c.separation, "Blob centre distance");
  app.add_option("--noise", c.noise, "XOR noise standard deviation");
  app.add_option("--arch", c.arch, "Layer widths d0,d1,...");
  app.add_option("--activation", c.activation, "relu or hardsig");
  app.add_option("--gamma", c.gamma, "Activation penalty");
  app.add_option("--beta", c.beta, "Output penalty");
  app.add_option("--warmup", c.warmup, "Warm-start iterations");
  app.add_option("--iters", c.iters, "Iterations after warm start");
  app.add_option("--ridge", c.ridge, "Relative ridge for Gram solves");
  app.add_option("--workers", c.workers, "Data-parallel workers");
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--lr", c.lr, "SGD learning rate (0: grid search)");
  app.add_option("--batch", c.batch, "SGD batch size");
  app.add_option("--epochs", c.epochs, "SGD epochs");
  app.add_option("--threshold", c.threshold, "Accuracy threshold for bench-scaling");
  app.add_option("--worker-list", c.worker_list, "Worker counts for bench-scaling");
  app.add_option("--weights", c.weights, "Weights file for eval");
  app.add_option("--save-weights", c.save_weights, "Write trained weights here");
  app.add_option("--out", c.out, "Output path");
}

/// Moves a `--config file` pair out of `args` and splices the file's settings in right after
/// the subcommand name so that explicit flags, which come later, override them.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  const auto extra = config_file_args(*path);
  const std::size_t at = std::min<std::size_t>(2, rest.size());
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return rest;
}

}  // namespace

std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

int run(std::vector<std::string> args) {
  RunConfig cfg;
  CLI::App app{"Gradient-free neural network training by alternating minimization"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion) + " (" + ADMM_GIT_REV + ")");
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&);
  };
  const Entry entries[] = {
      {"train", "Train with ADMM (single node or --workers N)", cmd_train},
      {"train-sgd", "Train the backprop SGD baseline", cmd_train_sgd},
      {"eval", "Evaluate saved weights on a dataset", cmd_eval},
      {"bench-scaling", "Time to reach --threshold for each worker count", cmd_bench_scaling},
      {"compare", "ADMM and SGD on the same split", cmd_compare},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_options(*sub, cfg);
  }

  try {
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& e : entries) {
    if (!app.got_subcommand(e.name)) continue;
    try {
      return e.fn(cfg);
    } catch (const ConfigError& ex) {
      std::cerr << "error: " << ex.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& ex) {
      std::cerr << "training failed: " << ex.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitConfig;
}

}  // namespace admm::cli
