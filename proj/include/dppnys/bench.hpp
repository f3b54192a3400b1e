#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dppnys/data.hpp"
#include "dppnys/types.hpp"

namespace dppnys::bench {

struct SyntheticSpec {
  Index n = 500;
  Index d = 5;
  double noise_sd = 0.1;
};

/// Parses "n,d,noise".
SyntheticSpec parse_synthetic(const std::string& text);

struct BenchConfig {
  std::optional<std::filesystem::path> data;
  ColumnRef target = Index{-1};
  std::optional<SyntheticSpec> synthetic;
  /// "identity" replaces the kernel by I_N (N from --synthetic).
  std::string preset;

  std::vector<std::string> methods;
  std::vector<Index> landmarks;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  double sigma = 1.0;
  double gamma = 1e-3;
  Index gibbs_iters = 3000;
  Index alpha_samples = 1000;
  Index kmeans_iters = 100;
  Index reference_rank = -1;  // -1: k = c
  bool lazy = true;
  unsigned threads = 1;

  double train_fraction = 0.75;
  std::uint64_t data_seed = 0;

  // mixing
  Index trace_iters = 5000;
  Index stride = 50;
  double epsilon = 0.01;
  std::vector<Index> tv_steps;
  Index tv_replicas = 0;  // 0: ten per subset

  // tradeoff
  std::vector<Index> iters_sweep{0, 10, 25, 50, 100, 150, 200};
  std::vector<Index> anchors{20, 60, 100, 140, 180, 220, 260, 300, 340};

  // cv; empty sigma grid means just `sigma`
  std::vector<double> cv_sigmas;
  std::vector<double> cv_gammas{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  Index cv_folds = 10;

  std::filesystem::path out;

  /// Throws std::invalid_argument on an empty or out-of-range field.
  void validate() const;
};

/// Fills in the documented defaults of a named preset (fig2, fig5, fig5-large,
/// fig7, identity); fields already set by the caller win where noted in the
/// README. Unknown names throw.
void apply_preset(BenchConfig& config, const std::string& name);

struct ResultRow {
  std::string method;
  Index c = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  double select_seconds = 0.0;
  double total_seconds = 0.0;
};

inline constexpr const char* kCsvHeader = "method,c,seed,metric,value,select_seconds,total_seconds";

const std::vector<std::string>& approx_methods();

std::vector<ResultRow> cmd_approx(const BenchConfig& config);
std::vector<ResultRow> cmd_krr(const BenchConfig& config);
std::vector<ResultRow> cmd_mixing(const BenchConfig& config);
std::vector<ResultRow> cmd_tradeoff(const BenchConfig& config);
/// Exact-KRR cross-validation on each seed's training split over the sigma and
/// gamma grids. Rows: cv_mse.sigma=<s>.gamma=<g>, best_sigma, best_gamma.
std::vector<ResultRow> cmd_cv(const BenchConfig& config);

/// Sorts by (method, c, seed, metric) and renders the CSV text.
std::string to_csv(std::vector<ResultRow> rows);

/// Writes to a temporary file next to `path` and renames it into place.
void write_csv_atomic(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

/// "%06lld" padding used in metric suffixes.
std::string padded(Index value);

}  // namespace dppnys::bench
