#include "dppnys/dpp_samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dppnys/parallel.hpp"
#include "sampling.hpp"

namespace dppnys {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRankTolerance = 1e-12;
constexpr double kSingularJitter = 1e-8;

double log_sum_exp(const std::vector<double>& v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

double logistic_of_difference(double current, double candidate) {
  return 1.0 / (1.0 + std::exp(current - candidate));
}

}  // namespace

Index SubsetDistribution::index_of(const LandmarkSet& s) const {
  if (s.size() != cardinality) throw std::invalid_argument("index_of: wrong cardinality");
  s.check_range(ground_size);
  double rank = 0.0;
  Index prev = -1;
  for (Index i = 0; i < cardinality; ++i) {
    for (Index v = prev + 1; v < s[i]; ++v) rank += binomial(ground_size - v - 1, cardinality - i - 1);
    prev = s[i];
  }
  return static_cast<Index>(rank);
}

Vector SubsetDistribution::marginals() const {
  Vector m = Vector::Zero(ground_size);
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (Index i : subsets[s]) m(i) += probabilities[s];
  }
  return m;
}

SubsetDistribution enumerate_cdpp(const PsdMatrix& k, Index c, double max_subsets) {
  const Index n = k.size();
  if (c < 0 || c > n) throw std::invalid_argument("enumerate_cdpp: need 0 <= c <= N");
  if (binomial(n, c) > max_subsets) {
    throw std::length_error("enumerate_cdpp: too many subsets to enumerate");
  }
  SubsetDistribution dist;
  dist.ground_size = n;
  dist.cardinality = c;

  std::vector<Index> combo(static_cast<std::size_t>(c));
  for (Index i = 0; i < c; ++i) combo[static_cast<std::size_t>(i)] = i;
  std::vector<double> logdets;
  while (true) {
    dist.subsets.emplace_back(combo);
    logdets.push_back(logdet_submatrix(k.data(), combo));
    Index i = c - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - c + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < c; ++j) {
      combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  dist.log_normalizer = log_sum_exp(logdets);
  if (dist.log_normalizer == kNegInf) {
    throw std::domain_error("enumerate_cdpp: every c-subset is singular");
  }
  dist.probabilities.resize(logdets.size());
  for (std::size_t s = 0; s < logdets.size(); ++s) {
    dist.probabilities[s] = std::exp(logdets[s] - dist.log_normalizer);
  }
  return dist;
}

LandmarkSet sample_cdpp_exact(const PsdMatrix& k, Index c, Rng& rng) {
  const Index n = k.size();
  if (c < 0 || c > n) throw std::invalid_argument("sample_cdpp_exact: need 0 <= c <= N");
  const Spectrum& spec = k.spectrum();
  Vector lambda = spec.values.cwiseMax(0.0);
  const double cutoff = n > 0 ? kRankTolerance * lambda(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < n; ++i) {
    if (lambda(i) > cutoff) {
      ++rank;
    } else {
      lambda(i) = 0.0;
    }
  }
  if (c > rank) throw std::domain_error("sample_cdpp_exact: c exceeds the rank of K");
  if (c == 0) return {};

  // log_e(l, m): log e_l of the first m eigenvalues.
  Matrix log_e = Matrix::Constant(c + 1, n + 1, kNegInf);
  log_e.row(0).setZero();
  for (Index m = 1; m <= n; ++m) {
    const double log_lambda = lambda(m - 1) > 0.0 ? std::log(lambda(m - 1)) : kNegInf;
    for (Index l = 1; l <= std::min(m, c); ++l) {
      const double a = log_e(l, m - 1);
      const double b = log_lambda + log_e(l - 1, m - 1);
      const double hi = std::max(a, b);
      log_e(l, m) = hi == kNegInf ? kNegInf : hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
  }

  std::vector<Index> chosen;
  Index remaining = c;
  for (Index m = n; m >= 1 && remaining > 0; --m) {
    if (lambda(m - 1) <= 0.0) continue;
    const double log_p = std::log(lambda(m - 1)) + log_e(remaining - 1, m - 1) - log_e(remaining, m);
    if (rng.uniform() < std::exp(log_p)) {
      chosen.push_back(m - 1);
      --remaining;
    }
  }

  Matrix v(n, c);
  for (Index j = 0; j < c; ++j) v.col(j) = spec.vectors.col(chosen[static_cast<std::size_t>(j)]);

  std::vector<Index> picked;
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Index cols = c; cols > 0; --cols) {
    auto basis = v.leftCols(cols);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      weights[static_cast<std::size_t>(i)] = basis.row(i).squaredNorm();
      total += weights[static_cast<std::size_t>(i)];
    }
    for (Index p : picked) {
      total -= weights[static_cast<std::size_t>(p)];
      weights[static_cast<std::size_t>(p)] = 0.0;
    }
    const Index item = detail::sample_discrete(weights, total, rng);
    picked.push_back(item);
    if (cols == 1) break;

    // Project the basis onto the subspace orthogonal to e_item.
    Index pivot = 0;
    basis.row(item).cwiseAbs().maxCoeff(&pivot);
    const Vector pivot_col = basis.col(pivot);
    const double pivot_val = pivot_col(item);
    basis.col(pivot).swap(basis.col(cols - 1));
    auto reduced = v.leftCols(cols - 1);
    for (Index j = 0; j < cols - 1; ++j) {
      reduced.col(j) -= pivot_col * (reduced(item, j) / pivot_val);
    }
    for (Index j = 0; j < cols - 1; ++j) {
      for (Index s = 0; s < j; ++s) reduced.col(j) -= reduced.col(s).dot(reduced.col(j)) * reduced.col(s);
      reduced.col(j).normalize();
    }
  }
  return LandmarkSet(std::move(picked));
}

GibbsState::GibbsState(const PsdMatrix& k, const LandmarkSet& initial, Rng rng) : rng_(rng) {
  const Index n = k.size();
  initial.check_range(n);
  in_set_.assign(static_cast<std::size_t>(n), 0);
  slot_.assign(static_cast<std::size_t>(n), 0);
  for (Index i : initial) {
    slot_[static_cast<std::size_t>(i)] = static_cast<Index>(members_.size());
    members_.push_back(i);
    in_set_[static_cast<std::size_t>(i)] = 1;
  }
  for (Index i = 0; i < n; ++i) {
    if (!in_set_[static_cast<std::size_t>(i)]) {
      slot_[static_cast<std::size_t>(i)] = static_cast<Index>(outside_.size());
      outside_.push_back(i);
    }
  }
  jitter_ = n > 0 ? kSingularJitter * k.trace() / static_cast<double>(n) : 0.0;
  scratch_.resize(members_.size() + 1);
  rebuild(k.data());
}

void GibbsState::rebuild(const Matrix& k) {
  factor_ = factor_submatrix(k, members_);
  logdet_ = factor_.logdet();
}

LandmarkSet GibbsState::landmarks() const { return LandmarkSet(members_); }

double GibbsState::jittered_logdet(const Matrix& k, std::span<const Index> set) const {
  const auto c = static_cast<Index>(set.size());
  Matrix sub(c, c);
  for (Index i = 0; i < c; ++i) {
    for (Index j = 0; j < c; ++j) sub(i, j) = k(set[static_cast<std::size_t>(i)], set[static_cast<std::size_t>(j)]);
  }
  sub.diagonal().array() += jitter_;
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) return kNegInf;
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double GibbsState::propose(const Matrix& k, Index pos_in, Index pos_out) {
  const Index y_out = outside_[static_cast<std::size_t>(pos_out)];
  if (logdet_ != kNegInf) {
    candidate_lower_ = factor_.lower;
    candidate_order_ = factor_.order;
    candidate_logdet_ = detail::swap_in_place(candidate_lower_, candidate_order_, pos_in, y_out, k,
                                              logdet_, scratch_.data());
    if (candidate_logdet_ == kNegInf) return 0.0;
    return logistic_of_difference(logdet_, candidate_logdet_);
  }

  // Singular current state: refactor the candidate from scratch.
  candidate_order_ = members_;
  candidate_order_.erase(candidate_order_.begin() + pos_in);
  candidate_order_.push_back(y_out);
  CholFactor fresh = factor_submatrix(k, candidate_order_);
  candidate_lower_ = std::move(fresh.lower);
  candidate_logdet_ = fresh.logdet();
  if (candidate_logdet_ != kNegInf) return 1.0;
  return logistic_of_difference(jittered_logdet(k, members_), jittered_logdet(k, candidate_order_));
}

void GibbsState::accept_candidate(Index pos_in, Index pos_out) {
  const Index y_in = members_[static_cast<std::size_t>(pos_in)];
  const Index y_out = outside_[static_cast<std::size_t>(pos_out)];
  std::swap(factor_.lower, candidate_lower_);
  std::swap(factor_.order, candidate_order_);
  logdet_ = candidate_logdet_;
  members_ = factor_.order;
  for (std::size_t p = static_cast<std::size_t>(pos_in); p < members_.size(); ++p) {
    slot_[static_cast<std::size_t>(members_[p])] = static_cast<Index>(p);
  }
  outside_[static_cast<std::size_t>(pos_out)] = y_in;
  slot_[static_cast<std::size_t>(y_in)] = pos_out;
  in_set_[static_cast<std::size_t>(y_in)] = 0;
  in_set_[static_cast<std::size_t>(y_out)] = 1;
}

double gibbs_swap_prob(const PsdMatrix& k, const GibbsState& state, Index y_in, Index y_out) {
  const Index n = state.ground_size();
  if (k.size() != n) throw std::invalid_argument("gibbs_swap_prob: kernel size does not match state");
  if (y_in < 0 || y_in >= n || !state.contains(y_in)) {
    throw std::invalid_argument("gibbs_swap_prob: y_in must be in Y");
  }
  if (y_out < 0 || y_out >= n || state.contains(y_out)) {
    throw std::invalid_argument("gibbs_swap_prob: y_out must lie outside Y");
  }
  GibbsState scratch = state;
  return scratch.propose(k.data(), state.slot_[static_cast<std::size_t>(y_in)],
                         state.slot_[static_cast<std::size_t>(y_out)]);
}

void gibbs_step(GibbsState& state, const PsdMatrix& k, const GibbsOptions& options) {
  if (k.size() != state.ground_size()) throw std::invalid_argument("gibbs_step: kernel size does not match state");
  const bool move = options.lazy ? state.rng_.bit() : true;
  const auto c = static_cast<std::uint64_t>(state.members_.size());
  const auto n_out = static_cast<std::uint64_t>(state.outside_.size());
  if (move && c > 0 && n_out > 0) {
    const auto pos_in = static_cast<Index>(state.rng_.below(c));
    const auto pos_out = static_cast<Index>(state.rng_.below(n_out));
    const double q = state.propose(k.data(), pos_in, pos_out);
    if (state.rng_.uniform() < q) state.accept_candidate(pos_in, pos_out);
  }
  ++state.step_;
  if (options.refresh_interval > 0 && state.step_ % options.refresh_interval == 0 &&
      state.logdet_ != kNegInf) {
    state.rebuild(k.data());
  }
}

LandmarkSet initial_landmarks(const ChainInit& init, Index n, Index c, Rng& rng) {
  if (const auto* given = std::get_if<LandmarkSet>(&init)) {
    if (given->size() != c) throw std::invalid_argument("initial landmark set has the wrong size");
    given->check_range(n);
    return *given;
  }
  if (const auto* kpp = std::get_if<KmeansppInit>(&init)) {
    if (kpp->features.get().rows() != n) throw std::invalid_argument("kmeans++ features do not match N");
    return kmeanspp_init(kpp->features.get(), c, rng);
  }
  return LandmarkSet(detail::uniform_subset(n, c, rng));
}

LandmarkSet gibbs_sample(const PsdMatrix& k, Index c, Index iterations, const ChainInit& init,
                         Rng& rng, const GibbsOptions& options) {
  const Index n = k.size();
  if (c < 1 || c >= n) throw std::invalid_argument("gibbs_sample: need 1 <= c < N");
  if (iterations < 0) throw std::invalid_argument("gibbs_sample: iterations must be >= 0");
  const LandmarkSet start = initial_landmarks(init, n, c, rng);
  GibbsState state(k, start, rng.split(hash_label("gibbs-chain")));
  for (Index t = 0; t < iterations; ++t) gibbs_step(state, k, options);
  return state.landmarks();
}

std::vector<LandmarkSet> run_gibbs_replicas(const PsdMatrix& k, const LandmarkSet& start,
                                            Index steps, Index replicas, std::uint64_t seed,
                                            const GibbsOptions& options, unsigned threads) {
  std::vector<LandmarkSet> out(static_cast<std::size_t>(std::max<Index>(replicas, 0)));
  const Rng root(seed);
  parallel_for(replicas, threads, [&](Index r) {
    GibbsState state(k, start, root.split(static_cast<std::uint64_t>(r)));
    for (Index t = 0; t < steps; ++t) gibbs_step(state, k, options);
    out[static_cast<std::size_t>(r)] = state.landmarks();
  });
  return out;
}

LandmarkSet kmeanspp_init(const Matrix& x, Index c, Rng& rng) {
  const Index n = x.rows();
  if (c < 0 || c > n) throw std::invalid_argument("kmeanspp_init: need 0 <= c <= N");
  if (c == 0) return {};
  std::vector<Index> chosen;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<double> dist2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  auto take = [&](Index i) {
    chosen.push_back(i);
    taken[static_cast<std::size_t>(i)] = 1;
    for (Index r = 0; r < n; ++r) {
      auto& d = dist2[static_cast<std::size_t>(r)];
      d = std::min(d, (x.row(r) - x.row(i)).squaredNorm());
    }
  };

  take(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  while (static_cast<Index>(chosen.size()) < c) {
    std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (Index r = 0; r < n; ++r) {
      if (!taken[static_cast<std::size_t>(r)]) {
        weights[static_cast<std::size_t>(r)] = dist2[static_cast<std::size_t>(r)];
        total += dist2[static_cast<std::size_t>(r)];
      }
    }
    if (total > 0.0) {
      take(detail::sample_discrete(weights, total, rng));
    } else {
      std::vector<Index> rest;
      for (Index r = 0; r < n; ++r) {
        if (!taken[static_cast<std::size_t>(r)]) rest.push_back(r);
      }
      take(rest[static_cast<std::size_t>(rng.below(rest.size()))]);
    }
  }
  return LandmarkSet(std::move(chosen));
}

}  // namespace dppnys
