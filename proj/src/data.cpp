#include "admm/data.hpp"

#include "admm/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace admm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return in;
}

Dataset assemble(std::size_t dim, const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& raw_labels,
                 const std::optional<std::vector<double>>& classes) {
  const std::size_t n = rows.size();
  Dataset data;
  data.features = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  if (classes) data.classes = *classes;
  data.labels = one_hot(raw_labels, data.classes);
  return data;
}

}  // namespace

std::vector<std::size_t> Dataset::label_indices() const {
  std::vector<std::size_t> out(samples());
  for (Eigen::Index j = 0; j < labels.cols(); ++j) {
    Eigen::Index idx = 0;
    labels.col(j).maxCoeff(&idx);
    out[static_cast<std::size_t>(j)] = static_cast<std::size_t>(idx);
  }
  return out;
}

void Dataset::validate() const {
  if (features.cols() != labels.cols()) {
    throw InvalidArgument("dataset: feature and label sample counts differ");
  }
  for (Eigen::Index j = 0; j < labels.cols(); ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
      const double v = labels(i, j);
      if (v != 0.0 && v != 1.0) throw InvalidArgument("dataset: label entries must be 0 or 1");
      sum += v;
    }
    if (sum != 1.0) throw InvalidArgument("dataset: label column " + std::to_string(j) + " is not one-hot");
  }
  if (!all_finite(features)) throw InvalidArgument("dataset: non-finite feature");
}

Dataset slice_columns(const Dataset& data, std::size_t begin, std::size_t count) {
  if (begin + count > data.samples()) throw InvalidArgument("slice_columns: range out of bounds");
  Dataset out;
  const auto b = static_cast<Eigen::Index>(begin);
  const auto c = static_cast<Eigen::Index>(count);
  out.features = data.features.middleCols(b, c);
  out.labels = data.labels.middleCols(b, c);
  out.classes = data.classes;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t first_count) {
  if (first_count > data.samples()) throw InvalidArgument("split: count exceeds sample count");
  return {slice_columns(data, 0, first_count),
          slice_columns(data, first_count, data.samples() - first_count)};
}

Matrix one_hot(const std::vector<double>& values, std::vector<double>& classes) {
  if (classes.empty()) {
    std::set<double> distinct(values.begin(), values.end());
    classes.assign(distinct.begin(), distinct.end());
  }
  std::map<double, Eigen::Index> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = static_cast<Eigen::Index>(i);
  Matrix labels = Matrix::Zero(static_cast<Eigen::Index>(classes.size()),
                               static_cast<Eigen::Index>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j) {
    const auto it = index.find(values[j]);
    if (it == index.end()) throw InvalidArgument("label value not among known classes");
    labels(it->second, static_cast<Eigen::Index>(j)) = 1.0;
  }
  return labels;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t label_column, bool has_header,
                 const std::optional<std::vector<double>>& classes) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (width == 0) {
      width = fields.size();
      if (label_column >= width) throw ParseError(line_no, "label column out of range");
    } else if (fields.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto value = parse_double(fields[i]);
      if (!value) {
        throw ParseError(line_no, "non-numeric field '" + std::string(trim(fields[i])) + "'");
      }
      if (i == label_column) {
        raw_labels.push_back(*value);
      } else {
        row.push_back(*value);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("'" + path.string() + "' contains no samples");
  return assemble(width - 1, rows, raw_labels, classes);
}

Dataset load_libsvm(const std::filesystem::path& path, std::size_t feature_dim,
                    const std::optional<std::vector<double>>& classes) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  std::size_t max_index = feature_dim;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
    if (view.empty()) continue;
    std::istringstream tokens{std::string(view)};
    std::string token;
    tokens >> token;
    const auto label = parse_double(token);
    if (!label) throw ParseError(line_no, "non-numeric label '" + token + "'");
    std::vector<double> row;
    std::set<std::size_t> seen;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "malformed pair '" + token + "'");
      std::size_t index = 0;
      const auto idx_str = std::string_view(token).substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), index);
      if (ec != std::errc() || ptr != idx_str.data() + idx_str.size() || index == 0) {
        throw ParseError(line_no, "bad feature index in '" + token + "'");
      }
      const auto value = parse_double(std::string_view(token).substr(colon + 1));
      if (!value) throw ParseError(line_no, "bad feature value in '" + token + "'");
      if (!seen.insert(index).second) {
        throw ParseError(line_no, "duplicate feature index " + std::to_string(index));
      }
      if (row.size() < index) row.resize(index, 0.0);
      row[index - 1] = *value;
      max_index = std::max(max_index, index);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(*label);
  }
  if (rows.empty()) throw InvalidArgument("'" + path.string() + "' contains no samples");
  return assemble(max_index, rows, raw_labels, classes);
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  const auto labels = data.label_indices();
  for (std::size_t j = 0; j < data.samples(); ++j) {
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
      out << data.features(i, static_cast<Eigen::Index>(j)) << ',';
    }
    const double value = data.classes.empty() ? static_cast<double>(labels[j]) : data.classes[labels[j]];
    out << value << '\n';
  }
}

Dataset NormalizeTransform::apply(const Dataset& data) const {
  if (data.feature_dim() != mean.size()) throw DimensionMismatch("normalize: feature count differs");
  Dataset out = data;
  for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.features.row(i) = (out.features.row(i).array() - mean[k]) / scale[k];
  }
  return out;
}

std::pair<Dataset, NormalizeTransform> normalize(const Dataset& data) {
  if (data.samples() == 0) throw InvalidArgument("normalize: empty dataset");
  NormalizeTransform t;
  const auto n = static_cast<double>(data.samples());
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const double mu = data.features.row(i).sum() / n;
    const double var = (data.features.row(i).array() - mu).square().sum() / n;
    t.mean.push_back(mu);
    t.scale.push_back(std::sqrt(std::max(var, 1e-12)));
  }
  return {t.apply(data), t};
}

Dataset gen_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                  std::uint64_t seed) {
  if (classes < 2 || dim == 0 || n < classes) {
    throw InvalidArgument("gen_blobs: need dim ≥ 1, classes ≥ 2 and n ≥ classes");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centres(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < classes; ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    if (classes == 2 && c == 1) {
      centres.row(1) = -centres.row(0);
      continue;
    }
    for (Eigen::Index k = 0; k < centres.cols(); ++k) centres(row, k) = normal(rng);
    centres.row(row) *= 0.5 * separation / centres.row(row).norm();
  }
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  std::vector<double> raw(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t c = j % classes;
    raw[j] = static_cast<double>(c);
    for (std::size_t k = 0; k < dim; ++k) {
      data.features(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          centres(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) + normal(rng);
    }
  }
  data.labels = one_hot(raw, data.classes);
  return data;
}

Dataset gen_xor(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 4) throw InvalidArgument("gen_xor: need at least 4 samples");
  if (!(noise >= 0.0)) throw InvalidArgument("gen_xor: noise must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kx[4] = {1.0, -1.0, -1.0, 1.0};
  constexpr double ky[4] = {1.0, 1.0, -1.0, -1.0};
  Dataset data;
  data.features.resize(2, static_cast<Eigen::Index>(n));
  std::vector<double> raw(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t q = j % 4;
    const auto col = static_cast<Eigen::Index>(j);
    data.features(0, col) = kx[q] + noise * normal(rng);
    data.features(1, col) = ky[q] + noise * normal(rng);
    raw[j] = (kx[q] * ky[q] < 0.0) ? 1.0 : 0.0;
  }
  std::vector<double> classes{0.0, 1.0};
  data.classes = classes;
  data.labels = one_hot(raw, data.classes);
  return data;
}

}  // namespace admm
