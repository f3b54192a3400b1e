#include "dppnys/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dppnys/dpp_samplers.hpp"
#include "sampling.hpp"

namespace dppnys {
namespace {

constexpr double kExhaustedTolerance = 1e-12;

void check_cardinality(Index n, Index c, const char* what) {
  if (c < 0 || c > n) throw std::invalid_argument(std::string(what) + ": need 0 <= c <= N");
}

Index pick_unchosen_uniform(const std::vector<char>& chosen, Rng& rng) {
  std::vector<Index> rest;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (!chosen[i]) rest.push_back(static_cast<Index>(i));
  }
  return rest[static_cast<std::size_t>(rng.below(rest.size()))];
}

}  // namespace

LandmarkSet uniform_landmarks(Index n, Index c, Rng& rng) {
  check_cardinality(n, c, "uniform_landmarks");
  return LandmarkSet(detail::uniform_subset(n, c, rng));
}

Vector leverage_scores(const PsdMatrix& k, Index rank) {
  if (rank < 0 || rank > k.size()) throw std::invalid_argument("leverage_scores: need 0 <= k <= N");
  const Spectrum& s = k.spectrum();
  const Index n = k.size();
  if (rank == 0 || rank == n) return s.vectors.leftCols(rank).rowwise().squaredNorm();
  // An eigenvalue block tied across the cut gets its share spread evenly, so
  // the scores do not depend on the basis chosen inside the block.
  const double tie = 1e-10 * std::max(s.values(0), 0.0);
  const double cut = s.values(rank - 1);
  Index lo = rank - 1, hi = rank;
  while (lo > 0 && std::abs(s.values(lo - 1) - cut) <= tie) --lo;
  while (hi < n && std::abs(s.values(hi) - cut) <= tie) ++hi;
  Vector scores = s.vectors.leftCols(lo).rowwise().squaredNorm();
  const double share = static_cast<double>(rank - lo) / static_cast<double>(hi - lo);
  scores += share * s.vectors.middleCols(lo, hi - lo).rowwise().squaredNorm();
  return scores;
}

Vector regularized_leverage_scores(const PsdMatrix& k, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("regularized_leverage_scores: gamma must be positive");
  const Spectrum& s = k.spectrum();
  const double ridge = static_cast<double>(k.size()) * gamma;
  const Vector lambda = s.values.cwiseMax(0.0);
  const Vector shrink = lambda.array() / (lambda.array() + ridge);
  return s.vectors.array().square().matrix() * shrink;
}

Vector approx_leverage_scores(const KernelSource& kernel, Index p, double gamma, Rng& rng) {
  const Index n = kernel.size();
  if (p < 1 || p > n) throw std::invalid_argument("approx_leverage_scores: need 1 <= p <= N");
  if (!(gamma >= 0.0)) throw std::invalid_argument("approx_leverage_scores: gamma must be >= 0");

  const Vector diag = kernel.diagonal();
  std::vector<double> weights(diag.data(), diag.data() + n);
  for (double& w : weights) w = std::max(w, 0.0);
  std::vector<Index> anchors;
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (Index a = 0; a < p; ++a) {
    Index i;
    if (total > kExhaustedTolerance * static_cast<double>(n)) {
      i = detail::sample_discrete(weights, total, rng);
    } else {
      i = pick_unchosen_uniform(taken, rng);
    }
    anchors.push_back(i);
    taken[static_cast<std::size_t>(i)] = 1;
    total -= weights[static_cast<std::size_t>(i)];
    weights[static_cast<std::size_t>(i)] = 0.0;
  }
  std::sort(anchors.begin(), anchors.end());

  const Matrix cols = kernel.columns(anchors);
  Matrix w(p, p);
  for (Index a = 0; a < p; ++a) w.row(a) = cols.row(anchors[static_cast<std::size_t>(a)]);
  w = (0.5 * (w + w.transpose())).eval();
  const Spectrum ws = eigh(w);
  const double cutoff = ws.values.size() > 0 ? 1e-12 * std::max(ws.values(0), 0.0) : 0.0;
  Index r = 0;
  while (r < p && ws.values(r) > cutoff) ++r;
  if (r == 0) return Vector::Zero(n);

  const Vector inv_sqrt = ws.values.head(r).cwiseSqrt().cwiseInverse();
  const Matrix b = cols * ws.vectors.leftCols(r) * inv_sqrt.asDiagonal();
  Matrix gram = b.transpose() * b;
  gram.diagonal().array() += static_cast<double>(n) * gamma;
  const Matrix core = pinv_psd(gram);
  return ((b * core).array() * b.array()).rowwise().sum().cwiseMax(0.0);
}

LandmarkSet sample_by_scores(const Vector& scores, Index c, Rng& rng) {
  const Index n = scores.size();
  check_cardinality(n, c, "sample_by_scores");
  if (!scores.allFinite() || (scores.array() < 0.0).any()) {
    throw std::invalid_argument("sample_by_scores: scores must be finite and nonnegative");
  }
  if ((scores.array() > 0.0).count() < c) {
    throw std::invalid_argument("sample_by_scores: fewer than c positive scores");
  }
  std::vector<double> weights(scores.data(), scores.data() + n);
  std::vector<Index> picked;
  for (Index round = 0; round < c; ++round) {
    double total = 0.0;
    for (double w : weights) total += w;
    const Index i = detail::sample_discrete(weights, total, rng);
    picked.push_back(i);
    weights[static_cast<std::size_t>(i)] = 0.0;
  }
  return LandmarkSet(std::move(picked));
}

AdaptiveResult adaptive_full(const PsdMatrix& k, Index c, Rng& rng) {
  const Index n = k.size();
  check_cardinality(n, c, "adaptive_full");
  AdaptiveResult out;
  Matrix residual = k.data();
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<Index> picked;
  const double scale = residual.colwise().squaredNorm().sum();
  std::vector<double> weights(static_cast<std::size_t>(n));

  for (Index round = 0; round < c; ++round) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double w = chosen[static_cast<std::size_t>(i)] ? 0.0 : residual.col(i).squaredNorm();
      weights[static_cast<std::size_t>(i)] = w;
      total += w;
    }
    Index i;
    if (total > kExhaustedTolerance * scale && total > 0.0) {
      i = detail::sample_discrete(weights, total, rng);
      const double pivot = residual(i, i);
      if (pivot > 0.0) {
        const Vector col = residual.col(i);
        residual.noalias() -= col * (col.transpose() / pivot);
      }
    } else {
      out.rank_exhausted = true;
      i = pick_unchosen_uniform(chosen, rng);
    }
    chosen[static_cast<std::size_t>(i)] = 1;
    picked.push_back(i);
  }
  out.landmarks = LandmarkSet(std::move(picked));
  return out;
}

AdaptiveResult adaptive_partial(const PsdMatrix& k, Index c, Rng& rng) {
  const Index n = k.size();
  check_cardinality(n, c, "adaptive_partial");
  AdaptiveResult out;
  const Matrix& km = k.data();
  const Vector col_norms = km.colwise().squaredNorm().transpose();
  const Vector kdiag = km.diagonal();
  Vector residual_diag = kdiag;
  Matrix g(n, c);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<Index> picked;
  std::vector<double> weights(static_cast<std::size_t>(n));
  const double scale = col_norms.sum();
  Index rank = 0;

  for (Index round = 0; round < c; ++round) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      double w = 0.0;
      if (!chosen[static_cast<std::size_t>(i)] && kdiag(i) > 0.0) {
        w = col_norms(i) * std::max(residual_diag(i), 0.0) / kdiag(i);
      }
      weights[static_cast<std::size_t>(i)] = w;
      total += w;
    }
    Index i;
    if (total > kExhaustedTolerance * scale && total > 0.0) {
      i = detail::sample_discrete(weights, total, rng);
      const double pivot = residual_diag(i);
      if (pivot > 0.0) {
        Vector col = km.col(i);
        if (rank > 0) col.noalias() -= g.leftCols(rank) * g.row(i).head(rank).transpose();
        col /= std::sqrt(pivot);
        g.col(rank) = col;
        residual_diag -= col.cwiseAbs2();
        ++rank;
      }
    } else {
      out.rank_exhausted = true;
      i = pick_unchosen_uniform(chosen, rng);
    }
    chosen[static_cast<std::size_t>(i)] = 1;
    residual_diag(i) = 0.0;
    picked.push_back(i);
  }
  out.landmarks = LandmarkSet(std::move(picked));
  return out;
}

CentroidLandmarks kmeans_landmarks(const Matrix& x, Index c, Index max_iters, Rng& rng) {
  const Index n = x.rows();
  if (c < 1 || c > n) throw std::invalid_argument("kmeans_landmarks: need 1 <= c <= N");
  if (max_iters < 0) throw std::invalid_argument("kmeans_landmarks: max_iters must be >= 0");
  const LandmarkSet seeds = kmeanspp_init(x, c, rng);
  CentroidLandmarks out;
  out.centroids.resize(c, x.cols());
  for (Index j = 0; j < c; ++j) out.centroids.row(j) = x.row(seeds[j]);

  std::vector<Index> assign(static_cast<std::size_t>(n), -1);
  Vector dist2(n);
  const Vector x_norms = x.rowwise().squaredNorm();
  for (Index iter = 0; iter <= max_iters; ++iter) {
    const Vector c_norms = out.centroids.rowwise().squaredNorm();
    const Matrix cross = x * out.centroids.transpose();
    bool changed = false;
    double objective = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < c; ++j) {
        const double d = x_norms(i) - 2.0 * cross(i, j) + c_norms(j);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      dist2(i) = (x.row(i) - out.centroids.row(best)).squaredNorm();
      objective += dist2(i);
      if (assign[static_cast<std::size_t>(i)] != best) changed = true;
      assign[static_cast<std::size_t>(i)] = best;
    }
    out.objective.push_back(objective);
    out.iterations = iter;
    if ((!changed && iter > 0) || iter == max_iters) break;

    Matrix sums = Matrix::Zero(c, x.cols());
    std::vector<Index> counts(static_cast<std::size_t>(c), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (Index j = 0; j < c; ++j) {
      const Index cnt = counts[static_cast<std::size_t>(j)];
      if (cnt > 0) {
        out.centroids.row(j) = sums.row(j) / static_cast<double>(cnt);
      } else {
        Index far = 0;
        dist2.maxCoeff(&far);
        out.centroids.row(j) = x.row(far);
        dist2(far) = 0.0;
      }
    }
  }
  return out;
}

}  // namespace dppnys
