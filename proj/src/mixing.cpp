#include "dppnys/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dppnys/krr.hpp"
#include "dppnys/nystrom.hpp"
#include "dppnys/parallel.hpp"
#include "sampling.hpp"

namespace dppnys {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSingularJitter = 1e-8;

double jittered_logdet(const Matrix& k, std::span<const Index> set, double jitter) {
  const auto c = static_cast<Index>(set.size());
  Matrix sub(c, c);
  for (Index i = 0; i < c; ++i) {
    for (Index j = 0; j < c; ++j) sub(i, j) = k(set[static_cast<std::size_t>(i)], set[static_cast<std::size_t>(j)]);
  }
  sub.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) return kNegInf;
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double q_direct(const PsdMatrix& k, std::span<const Index> y, Index v, Index u) {
  std::vector<Index> cand(y.begin(), y.end());
  const auto it = std::find(cand.begin(), cand.end(), v);
  *it = u;
  const double cur = logdet_submatrix(k.data(), y);
  const double next = logdet_submatrix(k.data(), cand);
  if (cur == kNegInf && next == kNegInf) {
    const double jitter = k.size() > 0 ? kSingularJitter * k.trace() / static_cast<double>(k.size()) : 0.0;
    return 1.0 / (1.0 + std::exp(jittered_logdet(k.data(), y, jitter) - jittered_logdet(k.data(), cand, jitter)));
  }
  if (next == kNegInf) return 0.0;
  if (cur == kNegInf) return 1.0;
  return 1.0 / (1.0 + std::exp(cur - next));
}

/// det(Y - y[p] + u) / det(Y) for every position p and every u outside Y,
/// from A = K_Y^{-1}: A_pp s_u + (A a_u)_p^2 with s_u = K_uu - a_u^T A a_u.
class SwapTable {
 public:
  SwapTable(const PsdMatrix& k, std::vector<Index> y) : k_(k), y_(std::move(y)) {
    const Index n = k.size();
    const auto c = static_cast<Index>(y_.size());
    slot_.assign(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < c; ++i) slot_[static_cast<std::size_t>(y_[static_cast<std::size_t>(i)])] = i;
    Matrix sub(c, c), cross(c, n);
    for (Index i = 0; i < c; ++i) {
      for (Index j = 0; j < c; ++j) sub(i, j) = k(y_[static_cast<std::size_t>(i)], y_[static_cast<std::size_t>(j)]);
      cross.row(i) = k.data().row(y_[static_cast<std::size_t>(i)]);
    }
    Eigen::LLT<Matrix> llt(sub);
    singular_ = llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0);
    if (singular_) return;
    inverse_diag_ = llt.solve(Matrix::Identity(c, c)).diagonal();
    solved_ = llt.solve(cross);
    schur_ = k.data().diagonal() - (cross.array() * solved_.array()).colwise().sum().transpose().matrix();
  }

  double q(Index v, Index u) const {
    if (singular_) return q_direct(k_, y_, v, u);
    const Index p = slot_[static_cast<std::size_t>(v)];
    if (p < 0) throw std::invalid_argument("coupling_terms: index not in set");
    const double ratio = std::max(inverse_diag_(p) * schur_(u) + solved_(p, u) * solved_(p, u), 0.0);
    return ratio / (1.0 + ratio);
  }

 private:
  const PsdMatrix& k_;
  std::vector<Index> y_;
  std::vector<Index> slot_;
  Vector inverse_diag_;
  Matrix solved_;  // K_Y^{-1} K_{Y,.}
  Vector schur_;
  bool singular_ = false;
};

void check_triple(Index n, std::span<const Index> s, Index r, Index t) {
  if (r == t) throw std::invalid_argument("coupling_terms: r and t must differ");
  if (r < 0 || r >= n || t < 0 || t >= n) throw std::out_of_range("coupling_terms: r or t out of range");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index v : s) {
    if (v < 0 || v >= n) throw std::out_of_range("coupling_terms: S index out of range");
    if (seen[static_cast<std::size_t>(v)]) throw std::invalid_argument("coupling_terms: duplicate index in S");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  if (seen[static_cast<std::size_t>(r)] || seen[static_cast<std::size_t>(t)]) {
    throw std::invalid_argument("coupling_terms: r and t must lie outside S");
  }
}

struct Triple {
  std::vector<Index> s;
  Index r;
  Index t;
};

ContractionEstimate summarize(const PsdMatrix& k, const std::vector<Triple>& triples, bool lower_bound,
                              unsigned threads) {
  std::vector<CouplingSums> sums(triples.size());
  parallel_for(static_cast<Index>(triples.size()), threads, [&](Index i) {
    const Triple& tr = triples[static_cast<std::size_t>(i)];
    sums[static_cast<std::size_t>(i)] = coupling_terms(k, tr.s, tr.r, tr.t);
  });
  ContractionEstimate out;
  out.samples = static_cast<Index>(triples.size());
  out.lower_bound = lower_bound;
  std::vector<double> values;
  values.reserve(sums.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    values.push_back(sums[i].contraction());
    if (values[i] > values[best]) best = i;
  }
  out.alpha = values[best];
  out.at_max = sums[best];
  out.worst_s = triples[best].s;
  out.worst_r = triples[best].r;
  out.worst_t = triples[best].t;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(values.size())));
  out.percentile95 = values[std::max<std::size_t>(rank, 1) - 1];
  return out;
}

void check_alpha_cardinality(Index n, Index c) {
  if (c < 1 || c >= n) throw std::invalid_argument("contraction estimate: need 1 <= c < N");
}

}  // namespace

double swap_probability(const PsdMatrix& k, std::span<const Index> y, Index v, Index u) {
  const Index n = k.size();
  if (v < 0 || v >= n || u < 0 || u >= n) throw std::out_of_range("swap_probability: index out of range");
  if (std::find(y.begin(), y.end(), v) == y.end()) throw std::invalid_argument("swap_probability: v must be in Y");
  if (std::find(y.begin(), y.end(), u) != y.end()) throw std::invalid_argument("swap_probability: u must lie outside Y");
  return q_direct(k, y, v, u);
}

CouplingSums coupling_terms(const PsdMatrix& k, std::span<const Index> s, Index r, Index t) {
  const Index n = k.size();
  check_triple(n, s, r, t);
  std::vector<Index> rs(s.begin(), s.end()), ts(s.begin(), s.end());
  rs.push_back(r);
  ts.push_back(t);
  const SwapTable table_r(k, rs), table_t(k, ts);

  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  for (Index v : s) excluded[static_cast<std::size_t>(v)] = 1;
  excluded[static_cast<std::size_t>(r)] = 1;
  excluded[static_cast<std::size_t>(t)] = 1;

  CouplingSums out;
  for (Index u = 0; u < n; ++u) {
    if (excluded[static_cast<std::size_t>(u)]) continue;
    out.p1 += std::min(table_r.q(r, u), table_t.q(t, u));
    for (Index v : s) out.p3 += std::abs(table_r.q(v, u) - table_t.q(v, u));
  }
  for (Index v : s) out.p2 += std::min(table_r.q(v, t), table_t.q(v, r));
  return out;
}

ContractionEstimate estimate_alpha(const PsdMatrix& k, Index c, Index n_samples, Rng& rng, unsigned threads) {
  const Index n = k.size();
  check_alpha_cardinality(n, c);
  if (n_samples < 1) throw std::invalid_argument("estimate_alpha: n_samples must be >= 1");
  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(n_samples));
  for (Index i = 0; i < n_samples; ++i) {
    std::vector<Index> draw = detail::uniform_subset(n, c + 1, rng);
    Triple tr;
    tr.t = draw.back();
    draw.pop_back();
    tr.r = draw.back();
    draw.pop_back();
    std::sort(draw.begin(), draw.end());
    tr.s = std::move(draw);
    triples.push_back(std::move(tr));
  }
  return summarize(k, triples, true, threads);
}

ContractionEstimate exhaustive_alpha(const PsdMatrix& k, Index c) {
  const Index n = k.size();
  check_alpha_cardinality(n, c);
  std::vector<Triple> triples;
  std::vector<Index> combo(static_cast<std::size_t>(c - 1));
  for (Index i = 0; i < c - 1; ++i) combo[static_cast<std::size_t>(i)] = i;
  while (true) {
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (Index v : combo) in[static_cast<std::size_t>(v)] = 1;
    for (Index r = 0; r < n; ++r) {
      if (in[static_cast<std::size_t>(r)]) continue;
      for (Index t = r + 1; t < n; ++t) {
        if (!in[static_cast<std::size_t>(t)]) triples.push_back({combo, r, t});
      }
    }
    Index i = c - 2;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - (c - 1) + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < c - 1; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
  }
  return summarize(k, triples, false, 1);
}

MixingBound mixing_time_bound(double alpha, Index c, Index n, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("mixing_time_bound: epsilon must be in (0,1)");
  if (c < 1 || c > n) throw std::invalid_argument("mixing_time_bound: need 1 <= c <= N");
  MixingBound b;
  b.epsilon = epsilon;
  b.alpha = alpha;
  b.defined = alpha < 1.0;
  b.tau_bound = b.defined ? 2.0 * static_cast<double>(c) * static_cast<double>(n - c) *
                                std::log(static_cast<double>(c) / epsilon) / (1.0 - alpha)
                          : std::numeric_limits<double>::quiet_NaN();
  return b;
}

Matrix gibbs_transition_matrix(const PsdMatrix& k, Index c, const GibbsOptions& options) {
  const Index n = k.size();
  if (c < 1 || c >= n) throw std::invalid_argument("gibbs_transition_matrix: need 1 <= c < N");
  const SubsetDistribution dist = enumerate_cdpp(k, c, kMaxEnumeratedStates);
  const auto m = static_cast<Index>(dist.subsets.size());
  Matrix p = Matrix::Zero(m, m);
  const double move = (options.lazy ? 0.5 : 1.0) / (static_cast<double>(c) * static_cast<double>(n - c));
  for (Index a = 0; a < m; ++a) {
    const LandmarkSet& y = dist.subsets[static_cast<std::size_t>(a)];
    const GibbsState state(k, y, Rng());
    double leave = 0.0;
    for (Index v : y) {
      for (Index u = 0; u < n; ++u) {
        if (y.contains(u)) continue;
        const double q = gibbs_swap_prob(k, state, v, u);
        std::vector<Index> next(y.begin(), y.end());
        *std::find(next.begin(), next.end(), v) = u;
        p(a, dist.index_of(LandmarkSet(std::move(next)))) += move * q;
        leave += move * q;
      }
    }
    p(a, a) += 1.0 - leave;
  }
  return p;
}

double tv_to_stationary(const PsdMatrix& k, Index c, Index t, Index replicas, Rng& rng,
                        const GibbsOptions& options, unsigned threads) {
  const Index n = k.size();
  if (c < 1 || c >= n) throw std::invalid_argument("tv_to_stationary: need 1 <= c < N");
  if (t < 0) throw std::invalid_argument("tv_to_stationary: t must be >= 0");
  const double states = binomial(n, c);
  if (states > kMaxEnumeratedStates) throw std::length_error("tv_to_stationary: too many subsets to enumerate");
  if (static_cast<double>(replicas) < 10.0 * states) {
    throw std::invalid_argument("tv_to_stationary: need at least 10 replicas per subset");
  }
  const SubsetDistribution dist = enumerate_cdpp(k, c, kMaxEnumeratedStates);
  Rng start_rng = rng.split(0);
  const LandmarkSet start(detail::uniform_subset(n, c, start_rng));
  const std::uint64_t seed = rng();
  const std::vector<LandmarkSet> ends = run_gibbs_replicas(k, start, t, replicas, seed, options, threads);

  std::vector<double> counts(dist.subsets.size(), 0.0);
  for (const LandmarkSet& s : ends) counts[static_cast<std::size_t>(dist.index_of(s))] += 1.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    tv += std::abs(counts[i] / static_cast<double>(replicas) - dist.probabilities[i]);
  }
  return 0.5 * tv;
}

const char* to_string(TraceMetric metric) {
  switch (metric) {
    case TraceMetric::relative_frobenius: return "rel_frobenius";
    case TraceMetric::relative_spectral: return "rel_spectral";
    case TraceMetric::train_mse: return "train_mse";
    case TraceMetric::test_mse: return "test_mse";
  }
  return "unknown";
}

std::vector<TraceRow> error_trace(const PsdMatrix& k, Index c, Index iterations, Index stride, Rng& rng,
                                  const TraceOptions& options) {
  const Index n = k.size();
  if (c < 1 || c >= n) throw std::invalid_argument("error_trace: need 1 <= c < N");
  if (iterations < 0) throw std::invalid_argument("error_trace: iterations must be >= 0");
  if (stride < 1) throw std::invalid_argument("error_trace: stride must be >= 1");
  const bool needs_krr = std::any_of(options.metrics.begin(), options.metrics.end(), [](TraceMetric m) {
    return m == TraceMetric::train_mse || m == TraceMetric::test_mse;
  });
  if (needs_krr && !options.krr) throw std::invalid_argument("error_trace: KRR metrics need evaluation data");
  if (needs_krr && (options.krr->y_train.size() != n || options.krr->k_test_train.cols() != n ||
                    options.krr->k_test_train.rows() != options.krr->y_test.size())) {
    throw std::invalid_argument("error_trace: KRR evaluation data has the wrong shape");
  }
  const Index rank = options.reference_rank < 0 ? c : options.reference_rank;

  const LandmarkSet start = initial_landmarks(options.init, n, c, rng);
  GibbsState state(k, start, rng.split(hash_label("gibbs-chain")));

  auto evaluate = [&]() {
    TraceRow row;
    row.step = state.step();
    const LandmarkSet landmarks = state.landmarks();
    auto approx = std::make_shared<const NystromApproximation>(build_nystrom(k, landmarks));
    std::optional<KrrModel> model;
    for (TraceMetric m : options.metrics) {
      switch (m) {
        case TraceMetric::relative_frobenius:
          row.values.push_back(relative_error(k, *approx, rank, Norm::frobenius));
          break;
        case TraceMetric::relative_spectral:
          row.values.push_back(relative_error(k, *approx, rank, Norm::spectral));
          break;
        case TraceMetric::train_mse:
        case TraceMetric::test_mse: {
          const KrrEvaluation& ev = *options.krr;
          if (!model) model = fit_nystrom(approx, ev.y_train, ev.gamma);
          if (m == TraceMetric::train_mse) {
            row.values.push_back(mean_squared_error(fitted(*model, k), ev.y_train));
          } else {
            Matrix k_test_c(ev.k_test_train.rows(), c);
            for (Index j = 0; j < c; ++j) k_test_c.col(j) = ev.k_test_train.col(landmarks[j]);
            row.values.push_back(mean_squared_error(predict(*model, nystrom_cross_kernel(*approx, k_test_c)), ev.y_test));
          }
          break;
        }
      }
    }
    return row;
  };

  std::vector<TraceRow> rows;
  rows.push_back(evaluate());
  for (Index step = 1; step <= iterations; ++step) {
    gibbs_step(state, k, options.gibbs);
    if (step % stride == 0 || step == iterations) rows.push_back(evaluate());
  }
  return rows;
}

}  // namespace dppnys
