#include "dppnys/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dppnys/baselines.hpp"
#include "dppnys/dpp_samplers.hpp"
#include "dppnys/kernel_source.hpp"
#include "dppnys/krr.hpp"
#include "dppnys/mixing.hpp"
#include "dppnys/nystrom.hpp"
#include "dppnys/parallel.hpp"

namespace dppnys::bench {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}


Dataset load(const BenchConfig& config) {
  Dataset ds;
  if (config.data) {
    ds = load_dataset(*config.data, config.target);
  } else if (config.synthetic) {
    ds = synthetic_regression(config.synthetic->n, config.synthetic->d, config.synthetic->noise_sd,
                              config.data_seed);
  } else {
    throw std::invalid_argument("no dataset: pass --data or --synthetic");
  }
  return standardize_targets(standardize(ds));
}

bool identity_kernel(const BenchConfig& config) { return config.preset == "identity"; }

PsdMatrix full_kernel(const BenchConfig& config, const Dataset& ds) {
  if (identity_kernel(config)) return PsdMatrix(Matrix::Identity(ds.size(), ds.size()));
  return PsdMatrix(rbf_kernel(ds.features, config.sigma));
}

struct Selection {
  std::optional<LandmarkSet> columns;
  std::optional<CentroidLandmarks> centroids;
  std::vector<std::pair<std::string, double>> extras;
};

Index approx_anchor_count(const BenchConfig& config, Index n) {
  return std::min(n, *std::max_element(config.anchors.begin(), config.anchors.end()));
}

Selection select(const std::string& method, const PsdMatrix& k, const Matrix& x, Index c,
                 const BenchConfig& config, Rng& rng) {
  const Index n = k.size();
  const GibbsOptions gibbs{config.lazy, 1000};
  Selection s;
  if (method == "kdpp") {
    s.columns = gibbs_sample(k, c, config.gibbs_iters, KmeansppInit{std::cref(x)}, rng, gibbs);
  } else if (method == "unif") {
    s.columns = uniform_landmarks(n, c, rng);
  } else if (method == "lev") {
    const Index rank = config.reference_rank < 0 ? c : config.reference_rank;
    s.columns = sample_by_scores(leverage_scores(k, rank), c, rng);
  } else if (method == "reglev") {
    s.columns = sample_by_scores(regularized_leverage_scores(k, config.gamma), c, rng);
  } else if (method == "applev" || method == "appreglev") {
    const double gamma = method == "applev" ? 0.0 : config.gamma;
    s.columns = sample_by_scores(approx_leverage_scores(DenseKernel(k), approx_anchor_count(config, n), gamma, rng),
                                 c, rng);
  } else if (method == "adapfull" || method == "adappart") {
    const AdaptiveResult r = method == "adapfull" ? adaptive_full(k, c, rng) : adaptive_partial(k, c, rng);
    s.columns = r.landmarks;
    if (r.rank_exhausted) s.extras.emplace_back("rank_exhausted", 1.0);
  } else if (method == "kmeans") {
    if (identity_kernel(config)) throw std::invalid_argument("kmeans needs feature data, not the identity preset");
    s.centroids = kmeans_landmarks(x, c, config.kmeans_iters, rng);
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }
  return s;
}

NystromApproximation approximate(const Selection& s, const PsdMatrix& k, const Matrix& x, double sigma) {
  if (s.columns) return build_nystrom(k, *s.columns);
  return build_nystrom(RbfKernel(x, sigma), *s.centroids);
}

void add_errors(std::vector<ResultRow>& rows, const ResultRow& base, const PsdMatrix& k,
                const NystromApproximation& approx, Index rank, const std::string& suffix = "") {
  ResultRow r = base;
  r.metric = "abs_frobenius" + suffix;
  r.value = absolute_error(k, approx, Norm::frobenius);
  rows.push_back(r);
  r.metric = "abs_spectral" + suffix;
  r.value = absolute_error(k, approx, Norm::spectral);
  rows.push_back(r);
  for (Norm norm : {Norm::frobenius, Norm::spectral}) {
    try {
      r.metric = "rel_" + to_string(norm) + suffix;
      r.value = relative_error(k, approx, rank, norm);
      rows.push_back(r);
    } catch (const std::domain_error&) {
      // undefined at this reference rank; the absolute rows stand alone
    }
  }
}

void check_methods(const std::vector<std::string>& methods, bool allow_exact) {
  for (const auto& m : methods) {
    const auto& known = approx_methods();
    const bool ok = std::find(known.begin(), known.end(), m) != known.end() || (allow_exact && m == "exact");
    if (!ok) throw std::invalid_argument("unknown method: " + m);
  }
}

struct Cell {
  std::string method;
  Index c;
  std::uint64_t seed;
};

std::vector<Cell> grid(const BenchConfig& config) {
  std::vector<Cell> cells;
  for (const auto& m : config.methods) {
    for (Index c : config.landmarks) {
      for (std::uint64_t seed : config.seeds) cells.push_back({m, c, seed});
    }
  }
  return cells;
}

Rng cell_rng(const std::string& method, Index c, std::uint64_t seed) {
  return Rng(seed, hash_label(method.c_str(), static_cast<std::uint64_t>(c)));
}

template <class Body>
std::vector<ResultRow> run_cells(const std::vector<Cell>& cells, unsigned threads, Body body) {
  std::vector<std::vector<ResultRow>> buffers(cells.size());
  parallel_for(static_cast<Index>(cells.size()), threads,
               [&](Index i) { buffers[static_cast<std::size_t>(i)] = body(cells[static_cast<std::size_t>(i)]); });
  std::vector<ResultRow> rows;
  for (auto& b : buffers) rows.insert(rows.end(), b.begin(), b.end());
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec s;
  std::istringstream in(text);
  std::string a, b, c;
  if (!std::getline(in, a, ',') || !std::getline(in, b, ',') || !std::getline(in, c) ) {
    throw std::invalid_argument("--synthetic expects n,d,noise");
  }
  try {
    s.n = std::stoll(a);
    s.d = std::stoll(b);
    s.noise_sd = std::stod(c);
  } catch (const std::exception&) {
    throw std::invalid_argument("--synthetic expects n,d,noise");
  }
  if (s.n < 2 || s.d < 1 || !(s.noise_sd >= 0.0)) throw std::invalid_argument("--synthetic: need n >= 2, d >= 1, noise >= 0");
  return s;
}

void BenchConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("need at least one method");
  if (landmarks.empty()) throw std::invalid_argument("need at least one landmark count");
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  for (Index c : landmarks) {
    if (c < 1) throw std::invalid_argument("landmark counts must be >= 1");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
  if (gibbs_iters < 0) throw std::invalid_argument("gibbs-iters must be >= 0");
  if (alpha_samples < 1) throw std::invalid_argument("alpha-samples must be >= 1");
  if (kmeans_iters < 0) throw std::invalid_argument("kmeans-iters must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train-fraction must be in (0,1)");
  if (trace_iters < 0) throw std::invalid_argument("trace-iters must be >= 0");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (anchors.empty() || iters_sweep.empty()) throw std::invalid_argument("sweeps must not be empty");
  for (Index p : anchors) {
    if (p < 1) throw std::invalid_argument("anchor counts must be >= 1");
  }
  for (Index t : iters_sweep) {
    if (t < 0) throw std::invalid_argument("iteration sweep values must be >= 0");
  }
  for (Index t : tv_steps) {
    if (t < 0) throw std::invalid_argument("tv steps must be >= 0");
  }
  if (!preset.empty() && preset != "identity" && preset != "fig2" && preset != "fig5" &&
      preset != "fig5-large" && preset != "fig7") {
    throw std::invalid_argument("unknown preset: " + preset);
  }
}

void apply_preset(BenchConfig& config, const std::string& name) {
  config.preset = name;
  if (name == "fig2") {
    config.synthetic = SyntheticSpec{500, 5, 0.1};
    config.methods = approx_methods();
    config.landmarks = {10, 20, 50};
  } else if (name == "fig5" || name == "fig5-large") {
    config.synthetic = SyntheticSpec{name == "fig5" ? 1000 : 4000, 5, 0.1};
    config.methods = {"kdpp"};
    config.landmarks = {50};
    config.trace_iters = 5000;
  } else if (name == "fig7") {
    config.synthetic = SyntheticSpec{4000, 5, 0.1};
    config.methods = {"kdpp", "applev", "appreglev", "unif", "adappart", "kmeans"};
    config.landmarks = {20};
    config.iters_sweep = {0, 10, 25, 50, 100, 150, 200};
    config.anchors = {20, 60, 100, 140, 180, 220, 260, 300, 340};
  } else if (name == "identity") {
    if (!config.synthetic) config.synthetic = SyntheticSpec{20, 1, 0.0};
    config.methods = {"kdpp"};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
}

const std::vector<std::string>& approx_methods() {
  static const std::vector<std::string> methods{"kdpp",     "unif",     "lev",      "reglev", "applev",
                                                "appreglev", "adapfull", "adappart", "kmeans"};
  return methods;
}

std::string padded(Index value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(value));
  return buf;
}

std::vector<ResultRow> cmd_approx(const BenchConfig& config) {
  config.validate();
  check_methods(config.methods, false);
  const Dataset ds = load(config);
  const PsdMatrix k = full_kernel(config, ds);
  k.spectrum();
  for (Index c : config.landmarks) {
    if (c > k.size()) throw std::invalid_argument("landmark count exceeds N");
  }
  return run_cells(grid(config), config.threads, [&](const Cell& cell) {
    std::vector<ResultRow> rows;
    Rng rng = cell_rng(cell.method, cell.c, cell.seed);
    const auto start = Clock::now();
    const Selection s = select(cell.method, k, ds.features, cell.c, config, rng);
    const double select_seconds = seconds_since(start);
    const NystromApproximation approx = approximate(s, k, ds.features, config.sigma);
    std::vector<ResultRow> metrics;
    ResultRow base{cell.method, cell.c, cell.seed, "", 0.0, select_seconds, 0.0};
    add_errors(metrics, base, k, approx, config.reference_rank < 0 ? cell.c : config.reference_rank);
    for (const auto& [name, value] : s.extras) metrics.push_back({cell.method, cell.c, cell.seed, name, value, select_seconds, 0.0});
    const double total = seconds_since(start);
    for (auto& r : metrics) r.total_seconds = total;
    rows.insert(rows.end(), metrics.begin(), metrics.end());
    return rows;
  });
}

std::vector<ResultRow> cmd_krr(const BenchConfig& config) {
  config.validate();
  check_methods(config.methods, true);
  const Dataset ds = load(config);

  struct Split {
    Dataset train, test;
    std::optional<PsdMatrix> k;
    Matrix k_test_train;
  };
  std::map<std::uint64_t, Split> splits;
  for (std::uint64_t seed : config.seeds) {
    Split sp;
    std::tie(sp.train, sp.test) = split(ds, config.train_fraction, seed);
    if (identity_kernel(config)) {
      sp.k.emplace(Matrix::Identity(sp.train.size(), sp.train.size()));
      sp.k_test_train = Matrix::Zero(sp.test.size(), sp.train.size());
    } else {
      sp.k.emplace(rbf_kernel(sp.train.features, config.sigma));
      sp.k_test_train = rbf_kernel(sp.test.features, sp.train.features, config.sigma);
    }
    sp.k->spectrum();
    for (Index c : config.landmarks) {
      if (c > sp.train.size()) throw std::invalid_argument("landmark count exceeds the training size");
    }
    splits.emplace(seed, std::move(sp));
  }

  std::vector<Cell> cells;
  for (const Cell& cell : grid(config)) {
    if (cell.method != "exact") cells.push_back(cell);
  }
  if (std::find(config.methods.begin(), config.methods.end(), "exact") != config.methods.end()) {
    for (std::uint64_t seed : config.seeds) cells.push_back({"exact", splits.at(seed).train.size(), seed});
  }

  return run_cells(cells, config.threads, [&](const Cell& cell) {
    const Split& sp = splits.at(cell.seed);
    const PsdMatrix& k = *sp.k;
    Rng rng = cell_rng(cell.method, cell.c, cell.seed);
    const auto start = Clock::now();
    double select_seconds = 0.0;
    Vector train_pred, test_pred;
    std::vector<std::pair<std::string, double>> extras;
    if (cell.method == "exact") {
      const KrrModel model = fit_exact(k, sp.train.targets, config.gamma);
      train_pred = fitted(model, k);
      test_pred = predict(model, sp.k_test_train);
    } else {
      const Selection s = select(cell.method, k, sp.train.features, cell.c, config, rng);
      select_seconds = seconds_since(start);
      extras = s.extras;
      auto approx = std::make_shared<const NystromApproximation>(approximate(s, k, sp.train.features, config.sigma));
      const KrrModel model = fit_nystrom(approx, sp.train.targets, config.gamma);
      train_pred = fitted(model, k);
      Matrix k_test_landmarks;
      if (s.columns) {
        k_test_landmarks.resize(sp.test.size(), cell.c);
        for (Index j = 0; j < cell.c; ++j) k_test_landmarks.col(j) = sp.k_test_train.col((*s.columns)[j]);
      } else {
        k_test_landmarks = rbf_kernel(sp.test.features, s.centroids->centroids, config.sigma);
      }
      test_pred = predict(model, nystrom_cross_kernel(*approx, k_test_landmarks));
    }
    const double total = seconds_since(start);
    std::vector<ResultRow> rows;
    rows.push_back({cell.method, cell.c, cell.seed, "train_mse", mean_squared_error(train_pred, sp.train.targets),
                    select_seconds, total});
    rows.push_back({cell.method, cell.c, cell.seed, "test_mse", mean_squared_error(test_pred, sp.test.targets),
                    select_seconds, total});
    for (const auto& [name, value] : extras) rows.push_back({cell.method, cell.c, cell.seed, name, value, select_seconds, total});
    return rows;
  });
}

std::vector<ResultRow> cmd_mixing(const BenchConfig& config) {
  config.validate();
  const Dataset ds = load(config);
  const PsdMatrix k = full_kernel(config, ds);
  const Index n = k.size();
  for (Index c : config.landmarks) {
    if (c >= n) throw std::invalid_argument("mixing needs c < N");
    if (!config.tv_steps.empty() && binomial(n, c) > kMaxEnumeratedStates) {
      throw std::length_error("TV distance needs C(N, c) <= 10000 subsets");
    }
  }
  if (!identity_kernel(config)) k.spectrum();

  std::vector<Cell> cells;
  for (Index c : config.landmarks) {
    for (std::uint64_t seed : config.seeds) cells.push_back({"kdpp", c, seed});
  }
  return run_cells(cells, config.threads, [&](const Cell& cell) {
    std::vector<ResultRow> rows;
    const auto start = Clock::now();
    Rng trace_rng = cell_rng("trace", cell.c, cell.seed);
    TraceOptions topts;
    topts.reference_rank = config.reference_rank;
    topts.gibbs.lazy = config.lazy;
    const auto trace = error_trace(k, cell.c, config.trace_iters, config.stride, trace_rng, topts);
    const double trace_seconds = seconds_since(start);
    for (const TraceRow& tr : trace) {
      rows.push_back({"kdpp", cell.c, cell.seed, "trace.rel_frobenius." + padded(tr.step), tr.values[0],
                      trace_seconds, trace_seconds});
    }

    const auto alpha_start = Clock::now();
    Rng alpha_rng = cell_rng("alpha", cell.c, cell.seed);
    const ContractionEstimate est = estimate_alpha(k, cell.c, config.alpha_samples, alpha_rng);
    const MixingBound bound = mixing_time_bound(est.alpha, cell.c, n, config.epsilon);
    const double alpha_seconds = seconds_since(alpha_start);
    rows.push_back({"kdpp", cell.c, cell.seed, "alpha", est.alpha, 0.0, alpha_seconds});
    rows.push_back({"kdpp", cell.c, cell.seed, "alpha.p95", est.percentile95, 0.0, alpha_seconds});
    rows.push_back({"kdpp", cell.c, cell.seed, "alpha.samples", static_cast<double>(est.samples), 0.0, alpha_seconds});
    if (bound.defined) {
      rows.push_back({"kdpp", cell.c, cell.seed, "mixing_bound", bound.tau_bound, 0.0, alpha_seconds});
    } else {
      rows.push_back({"kdpp", cell.c, cell.seed, "mixing_bound_undefined", 1.0, 0.0, alpha_seconds});
    }

    for (Index t : config.tv_steps) {
      const auto tv_start = Clock::now();
      Rng tv_rng = cell_rng("tv", cell.c, cell.seed);
      const Index replicas = config.tv_replicas > 0
                                 ? config.tv_replicas
                                 : static_cast<Index>(10.0 * binomial(n, cell.c));
      const double tv = tv_to_stationary(k, cell.c, t, replicas, tv_rng, GibbsOptions{config.lazy, 1000});
      rows.push_back({"kdpp", cell.c, cell.seed, "tv.t=" + padded(t), tv, 0.0, seconds_since(tv_start)});
    }
    return rows;
  });
}

std::vector<ResultRow> cmd_tradeoff(const BenchConfig& config) {
  config.validate();
  check_methods(config.methods, false);
  const Dataset ds = load(config);
  const PsdMatrix k = full_kernel(config, ds);
  k.spectrum();
  const Index n = k.size();
  for (Index c : config.landmarks) {
    if (c > n) throw std::invalid_argument("landmark count exceeds N");
  }
  std::vector<Index> sweep = config.iters_sweep;
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());

  return run_cells(grid(config), config.threads, [&](const Cell& cell) {
    std::vector<ResultRow> rows;
    const Index rank = config.reference_rank < 0 ? cell.c : config.reference_rank;
    auto emit = [&](const std::string& metric, const NystromApproximation& approx, double select_seconds,
                    Clock::time_point eval_start, double offset) {
      double value;
      try {
        value = relative_error(k, approx, rank, Norm::frobenius);
      } catch (const std::domain_error&) {
        return;
      }
      rows.push_back({cell.method, cell.c, cell.seed, metric, value, select_seconds,
                      offset + seconds_since(eval_start)});
    };
    Rng rng = cell_rng(cell.method, cell.c, cell.seed);

    if (cell.method == "kdpp") {
      if (cell.c >= n) throw std::invalid_argument("kdpp needs c < N");
      const auto start = Clock::now();
      const LandmarkSet init = initial_landmarks(KmeansppInit{std::cref(ds.features)}, n, cell.c, rng);
      GibbsState state(k, init, rng.split(hash_label("gibbs-chain")));
      double chain_seconds = seconds_since(start);
      Index done = 0;
      for (Index target : sweep) {
        const auto run_start = Clock::now();
        for (; done < target; ++done) gibbs_step(state, k, GibbsOptions{config.lazy, 1000});
        chain_seconds += seconds_since(run_start);
        const auto eval_start = Clock::now();
        emit("rel_frobenius.iters=" + padded(target), build_nystrom(k, state.landmarks()), chain_seconds,
             eval_start, chain_seconds);
      }
    } else if (cell.method == "applev" || cell.method == "appreglev") {
      const double gamma = cell.method == "applev" ? 0.0 : config.gamma;
      for (Index p : config.anchors) {
        if (p > n) continue;
        Rng prng = rng.split(static_cast<std::uint64_t>(p));
        const auto start = Clock::now();
        const LandmarkSet s = sample_by_scores(approx_leverage_scores(DenseKernel(k), p, gamma, prng), cell.c, prng);
        const double select_seconds = seconds_since(start);
        const auto eval_start = Clock::now();
        emit("rel_frobenius.p=" + padded(p), build_nystrom(k, s), select_seconds, eval_start, select_seconds);
      }
    } else {
      const auto start = Clock::now();
      const Selection s = select(cell.method, k, ds.features, cell.c, config, rng);
      const double select_seconds = seconds_since(start);
      const auto eval_start = Clock::now();
      emit("rel_frobenius", approximate(s, k, ds.features, config.sigma), select_seconds, eval_start, select_seconds);
    }
    return rows;
  });
}

std::vector<ResultRow> cmd_cv(const BenchConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("need at least one seed");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw std::invalid_argument("train-fraction must be in (0,1)");
  }
  if (config.cv_gammas.empty()) throw std::invalid_argument("cv gamma grid is empty");
  if (identity_kernel(config)) throw std::invalid_argument("cv needs feature data, not the identity preset");
  const std::vector<double> sigmas = config.cv_sigmas.empty() ? std::vector<double>{config.sigma} : config.cv_sigmas;
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("cv sigmas must be positive");
  }
  const Dataset ds = load(config);
  std::vector<ResultRow> rows;
  for (std::uint64_t seed : config.seeds) {
    const auto start = Clock::now();
    const std::size_t first = rows.size();
    const Dataset train = split(ds, config.train_fraction, seed).first;
    double best = std::numeric_limits<double>::infinity(), best_sigma = sigmas.front(), best_gamma = 0.0;
    for (double sigma : sigmas) {
      const GridResult g = grid_search_gamma(PsdMatrix(rbf_kernel(train.features, sigma)), train.targets,
                                             config.cv_gammas, config.cv_folds, seed);
      for (std::size_t j = 0; j < g.gammas.size(); ++j) {
        char name[96];
        std::snprintf(name, sizeof name, "cv_mse.sigma=%g.gamma=%g", sigma, g.gammas[j]);
        rows.push_back({"exact", train.size(), seed, name, g.scores[j], 0.0, 0.0});
        if (g.scores[j] < best) {
          best = g.scores[j];
          best_sigma = sigma;
          best_gamma = g.gammas[j];
        }
      }
    }
    rows.push_back({"exact", train.size(), seed, "best_sigma", best_sigma, 0.0, 0.0});
    rows.push_back({"exact", train.size(), seed, "best_gamma", best_gamma, 0.0, 0.0});
    const double elapsed = seconds_since(start);
    for (std::size_t r = first; r < rows.size(); ++r) rows[r].total_seconds = elapsed;
  }
  return rows;
}

std::string to_csv(std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.c, a.seed, a.metric) < std::tie(b.method, b.c, b.seed, b.metric);
  });
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[64];
  for (const auto& r : rows) {
    if (!std::isfinite(r.value)) continue;
    out += r.method;
    out += ',' + std::to_string(r.c) + ',' + std::to_string(r.seed) + ',' + r.metric + ',';
    out += format_double(r.value);
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", std::max(r.select_seconds, 0.0), std::max(r.total_seconds, 0.0));
    out += buf;
  }
  return out;
}

void write_csv_atomic(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  const std::string text = to_csv(rows);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dppnys::bench
