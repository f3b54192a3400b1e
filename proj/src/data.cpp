#include "dppnys/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dppnys/rng.hpp"

namespace dppnys {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, Index row, Index col) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw std::runtime_error("non-numeric value at (" + std::to_string(row) + "," +
                             std::to_string(col) + "): '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error("non-finite value at (" + std::to_string(row) + "," +
                             std::to_string(col) + ")");
  }
  return value;
}

}  // namespace

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), dim());
  out.targets.resize(static_cast<Index>(rows.size()));
  if (noiseless_targets) out.noiseless_targets = Vector(static_cast<Index>(rows.size()));
  out.noise_sd = noise_sd;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Index>(k);
    out.features.row(r) = features.row(rows[k]);
    out.targets(r) = targets(rows[k]);
    if (noiseless_targets) (*out.noiseless_targets)(r) = (*noiseless_targets)(rows[k]);
  }
  return out;
}

void KernelConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("kernel bandwidth sigma must be positive");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("regularization gamma must be nonnegative");
  }
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnRef& target_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw std::runtime_error("no rows");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  const auto n_cols = static_cast<Index>(header.size());

  Index target = -1;
  if (const auto* name = std::get_if<std::string>(&target_column)) {
    for (Index j = 0; j < n_cols; ++j) {
      if (header[static_cast<std::size_t>(j)] == *name) target = j;
    }
    if (target < 0) throw std::runtime_error("target column not found: " + *name);
  } else {
    target = std::get<Index>(target_column);
    if (target < 0) target += n_cols;
    if (target < 0 || target >= n_cols) {
      throw std::runtime_error("target column index out of range");
    }
  }
  if (n_cols < 2) throw std::runtime_error("need at least one feature column besides the target");

  std::vector<std::vector<double>> rows;
  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<Index>(cells.size()) != n_cols) {
      throw std::runtime_error("row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(n_cols));
    }
    std::vector<double> values(cells.size());
    for (Index j = 0; j < n_cols; ++j) {
      values[static_cast<std::size_t>(j)] = parse_cell(cells[static_cast<std::size_t>(j)], row, j);
    }
    rows.push_back(std::move(values));
    ++row;
  }
  if (rows.empty()) throw std::runtime_error("no rows");
  if (rows.size() < 2) throw std::runtime_error("fewer than 2 rows");

  Dataset ds;
  const auto n = static_cast<Index>(rows.size());
  ds.features.resize(n, n_cols - 1);
  ds.targets.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& values = rows[static_cast<std::size_t>(i)];
    Index f = 0;
    for (Index j = 0; j < n_cols; ++j) {
      const double v = values[static_cast<std::size_t>(j)];
      if (j == target) {
        ds.targets(i) = v;
      } else {
        ds.features(i, f++) = v;
      }
    }
  }
  return ds;
}

Dataset standardize(const Dataset& ds) {
  Dataset out = ds;
  const Index n = ds.size();
  if (n < 2) throw std::invalid_argument("standardize needs at least 2 rows");
  for (Index j = 0; j < ds.dim(); ++j) {
    auto col = out.features.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
    if (sd > 0.0 && std::isfinite(sd)) {
      col /= sd;
    } else {
      col.setZero();
    }
  }
  return out;
}

Dataset standardize_targets(const Dataset& ds) {
  Dataset out = ds;
  const Index n = ds.size();
  if (n < 2) throw std::invalid_argument("standardize_targets needs at least 2 rows");
  const double mean = ds.targets.mean();
  const double sd = std::sqrt((ds.targets.array() - mean).square().sum() / static_cast<double>(n - 1));
  const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
  out.targets = (ds.targets.array() - mean) * scale;
  if (ds.noiseless_targets) out.noiseless_targets = ((ds.noiseless_targets->array() - mean) * scale).matrix();
  if (ds.noise_sd) out.noise_sd = *ds.noise_sd * scale;
  return out;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_fraction,
                                                                std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw std::invalid_argument("split leaves an empty train or test part");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed, hash_label("split"));
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> train(perm.begin(), perm.begin() + n_train);
  std::vector<Index> test(perm.begin() + n_train, perm.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const auto [train, test] = split_indices(ds.size(), train_fraction, seed);
  return {ds.subset(train), ds.subset(test)};
}

Matrix rbf_kernel(const Matrix& x, const Matrix& x2, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf_kernel: sigma must be positive");
  if (x.cols() != x2.cols()) throw std::invalid_argument("rbf_kernel: feature dimensions differ");
  const double scale = -1.0 / (2.0 * sigma * sigma);
  Matrix k(x.rows(), x2.rows());
  for (Index j = 0; j < x2.rows(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      k(i, j) = std::exp(scale * (x.row(i) - x2.row(j)).squaredNorm());
    }
  }
  return k;
}

Matrix rbf_kernel(const Matrix& x, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf_kernel: sigma must be positive");
  const double scale = -1.0 / (2.0 * sigma * sigma);
  const Index n = x.rows();
  Matrix k(n, n);
  for (Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Index i = j + 1; i < n; ++i) {
      const double v = std::exp(scale * (x.row(i) - x.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Matrix linear_kernel(const Matrix& x) {
  Matrix k = Matrix::Zero(x.rows(), x.rows());
  k.selfadjointView<Eigen::Lower>().rankUpdate(x);
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

Dataset synthetic_regression(Index n, Index d, double noise_sd, std::uint64_t seed) {
  if (n < 2 || d < 1) throw std::invalid_argument("synthetic_regression: need n >= 2 and d >= 1");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("synthetic_regression: noise_sd must be >= 0");
  constexpr Index kFeatures = 10;

  Rng function_rng(seed, hash_label("synthetic-function"));
  Matrix freq(kFeatures, d);
  Vector phase(kFeatures), weight(kFeatures);
  for (Index m = 0; m < kFeatures; ++m) {
    for (Index j = 0; j < d; ++j) freq(m, j) = function_rng.normal();
    phase(m) = 2.0 * M_PI * function_rng.uniform();
    weight(m) = function_rng.normal();
  }

  Rng feature_rng(seed, hash_label("synthetic-features"));
  Rng noise_rng(seed, hash_label("synthetic-noise"));
  Dataset ds;
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.features(i, j) = 2.0 * feature_rng.uniform() - 1.0;
  }
  Vector z = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < kFeatures; ++m) {
      z(i) += weight(m) * std::cos(freq.row(m).dot(ds.features.row(i)) + phase(m));
    }
  }
  ds.targets = z;
  if (noise_sd > 0.0) {
    for (Index i = 0; i < n; ++i) ds.targets(i) += noise_sd * noise_rng.normal();
  }
  ds.noiseless_targets = std::move(z);
  ds.noise_sd = noise_sd;
  return ds;
}

}  // namespace dppnys
