#pragma once

#include <vector>

#include "dppnys/kernel_source.hpp"
#include "dppnys/psd_linalg.hpp"
#include "dppnys/rng.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// c indices drawn uniformly without replacement.
LandmarkSet uniform_landmarks(Index n, Index c, Rng& rng);

/// Squared row norms of the top-k eigenvector block; they sum to k. When
/// lambda_k is tied with lambda_{k+1}, the tied block contributes with weight
/// (k - #larger) / #tied.
Vector leverage_scores(const PsdMatrix& k, Index rank);

/// diag(K (K + N gamma I)^{-1}).
Vector regularized_leverage_scores(const PsdMatrix& k, double gamma);

/// Leverage scores of an anchor-based surrogate.
///
/// p anchors are drawn without replacement with probability proportional to
/// K_ii, B = K_{.,A} W^{+1/2} with W = K_{A,A}, and
/// score_i = B_i (B^T B + N gamma I)^+ B_i^T. With gamma = 0 these are the
/// plain leverage scores of B's column space. Only N x p kernel columns are
/// read.
Vector approx_leverage_scores(const KernelSource& kernel, Index p, double gamma, Rng& rng);

/// c distinct indices drawn one after another, each with probability
/// proportional to the scores of the indices not yet drawn.
LandmarkSet sample_by_scores(const Vector& scores, Index c, Rng& rng);

struct AdaptiveResult {
  LandmarkSet landmarks;
  /// The residual vanished before c picks; the rest were drawn uniformly.
  bool rank_exhausted = false;
};

/// Adaptive sampling on the full Nystrom residual: each round draws an index
/// with probability proportional to the squared norm of its residual column,
/// then replaces the residual by its Schur complement. O(N^2) per round.
AdaptiveResult adaptive_full(const PsdMatrix& k, Index c, Rng& rng);

/// Cheap variant: the column norms of K are computed once and scaled by the
/// residual diagonal, which is updated by one pivoted-Cholesky column per
/// round. O(Nc) per round after an O(N^2) setup.
AdaptiveResult adaptive_partial(const PsdMatrix& k, Index c, Rng& rng);

struct CentroidLandmarks {
  Matrix centroids;  // c x d
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> objective;
  Index iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds. An empty cluster is moved onto the
/// point farthest from its current centroid.
CentroidLandmarks kmeans_landmarks(const Matrix& x, Index c, Index max_iters, Rng& rng);

}  // namespace dppnys
