#pragma once

#include "admm/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace admm {

/// Training data with one sample per column.
struct Dataset {
  Matrix features;  ///< d₀ × n
  Matrix labels;    ///< classes × n, one-hot
  /// Original label value of each one-hot row, ascending.
  std::vector<double> classes;

  std::size_t samples() const noexcept { return static_cast<std::size_t>(features.cols()); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t class_count() const noexcept { return static_cast<std::size_t>(labels.rows()); }

  /// Row index of the 1 in each label column.
  std::vector<std::size_t> label_indices() const;

  /// Throws InvalidArgument unless labels are one-hot and sample counts agree.
  void validate() const;
};

/// Columns [begin, begin + count) of both features and labels.
Dataset slice_columns(const Dataset& data, std::size_t begin, std::size_t count);

/// Splits off the first `first_count` samples; the remainder becomes the second set.
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t first_count);

/// Encodes raw label values one-hot. With `classes` empty the sorted distinct values are used;
/// otherwise every value must appear in `classes`.
Matrix one_hot(const std::vector<double>& values, std::vector<double>& classes);

/// Numeric CSV, one sample per row. `classes` fixes the label encoding when given.
Dataset load_csv(const std::filesystem::path& path, std::size_t label_column, bool has_header,
                 const std::optional<std::vector<double>>& classes = std::nullopt);

/// LibSVM sparse text: "label idx:value ...", 1-based indices. `feature_dim` pads the dense
/// feature count when the file does not mention the highest index.
Dataset load_libsvm(const std::filesystem::path& path, std::size_t feature_dim = 0,
                    const std::optional<std::vector<double>>& classes = std::nullopt);

/// Writes features followed by the original label value as the last column, no header.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Per-feature standardization recorded on training data.
struct NormalizeTransform {
  std::vector<double> mean;
  std::vector<double> scale;

  Dataset apply(const Dataset& data) const;
};

/// Zero mean and unit variance per feature row; variances below 1e-12 are floored.
std::pair<Dataset, NormalizeTransform> normalize(const Dataset& data);

/// Isotropic unit-variance Gaussian clusters whose centres lie `separation`/2 from the origin.
/// With two classes the centres are antipodal, so centre distance equals `separation`.
Dataset gen_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                  std::uint64_t seed);

/// Two-feature XOR: sample i sits at quadrant centre (±1, ±1) chosen by i mod 4, plus
/// Gaussian noise of standard deviation `noise`. Label is 1 when the signs differ.
Dataset gen_xor(std::size_t n, double noise, std::uint64_t seed);

}  // namespace admm
