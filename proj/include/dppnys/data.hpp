#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "dppnys/types.hpp"

namespace dppnys {

/// Regression data set. `noiseless_targets` and `noise_sd` are only present
/// for synthetic data, where the clean signal z is known.
struct Dataset {
  Matrix features;  // N x d
  Vector targets;   // y
  std::optional<Vector> noiseless_targets;
  std::optional<double> noise_sd;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Rows selected by `rows`, in that order.
  Dataset subset(std::span<const Index> rows) const;
};

struct KernelConfig {
  double sigma = 1.0;  // RBF bandwidth, exp(-|x-x'|^2 / (2 sigma^2))
  double gamma = 1e-3; // ridge parameter; the solve uses N * gamma

  void validate() const;
};

/// Target column, by header name or zero-based position (negative positions
/// count from the end).
using ColumnRef = std::variant<std::string, Index>;

/// Reads a comma-separated file with a header row. Throws std::runtime_error
/// for a missing file, a non-numeric or non-finite cell, or fewer than two
/// data rows.
Dataset load_dataset(const std::filesystem::path& path, const ColumnRef& target_column);

/// Centers each feature column and scales it to unit sample standard
/// deviation (N-1 denominator). Constant columns become zero.
Dataset standardize(const Dataset& ds);

/// Applies the same affine map to targets and noiseless targets so that the
/// targets have mean 0 and unit sample standard deviation.
Dataset standardize_targets(const Dataset& ds);

/// Seeded random partition into (train, test) with round(N * train_fraction)
/// training rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Row indices of the training and test parts produced by `split`.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_fraction,
                                                                std::uint64_t seed);

/// Gaussian kernel between the rows of `x` and `x2`.
Matrix rbf_kernel(const Matrix& x, const Matrix& x2, double sigma);

/// Symmetric version: each pair is evaluated once and the diagonal is 1.
Matrix rbf_kernel(const Matrix& x, double sigma);

/// X X^T; used as a low-rank test kernel.
Matrix linear_kernel(const Matrix& x);

/// Synthetic regression problem: x uniform on [-1, 1]^d, z = sum of 10 random cosine
/// features, y = z + N(0, noise_sd^2).
Dataset synthetic_regression(Index n, Index d, double noise_sd, std::uint64_t seed);

}  // namespace dppnys
