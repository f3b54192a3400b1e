#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dppnys/dpp_samplers.hpp"
#include "dppnys/psd_linalg.hpp"
#include "dppnys/rng.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// q(v, u, Y) = det(K_{Y'}) / (det(K_{Y'}) + det(K_Y)) with Y' = Y - v + u,
/// using the same singular-state rules as the chain.
double swap_probability(const PsdMatrix& k, std::span<const Index> y, Index v, Index u);

struct CouplingSums {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;

  double contraction() const { return p3 - p1 - p2; }
};

/// Path-coupling sums for the adjacent states R = S + r and T = S + t:
///   p1 = sum_{u not in S+r+t} min{q(r,u,R), q(t,u,T)}
///   p2 = sum_{v in S} min{q(v,t,R), q(v,r,T)}
///   p3 = sum_{v in S, u not in S+r+t} |q(v,u,R) - q(v,u,T)|
CouplingSums coupling_terms(const PsdMatrix& k, std::span<const Index> s, Index r, Index t);

struct ContractionEstimate {
  /// max over the evaluated (S, r, t) of p3 - p1 - p2.
  double alpha = 0.0;
  /// 95th percentile of the same quantity (nearest rank). Diagnostic only.
  double percentile95 = 0.0;
  Index samples = 0;
  /// True when only a subsample was evaluated, so alpha is a lower bound.
  bool lower_bound = true;
  CouplingSums at_max;
  std::vector<Index> worst_s;
  Index worst_r = -1;
  Index worst_t = -1;
};

inline constexpr Index kDefaultAlphaSamples = 1000;

/// Uniformly drawn (S, r, t) triples with |S| = c - 1.
ContractionEstimate estimate_alpha(const PsdMatrix& k, Index c, Index n_samples, Rng& rng,
                                   unsigned threads = 1);

/// Every (S, {r, t}); the terms are symmetric in r and t.
ContractionEstimate exhaustive_alpha(const PsdMatrix& k, Index c);

struct MixingBound {
  double epsilon = 0.0;
  double alpha = 0.0;
  /// 2 c (N - c) log(c / epsilon) / (1 - alpha); NaN when undefined.
  double tau_bound = 0.0;
  /// False when alpha >= 1 and the bound does not apply.
  bool defined = false;
};

MixingBound mixing_time_bound(double alpha, Index c, Index n, double epsilon);

/// Transition matrix of one chain step over the c-subsets, in the order of
/// enumerate_cdpp.
Matrix gibbs_transition_matrix(const PsdMatrix& k, Index c, const GibbsOptions& options = {});

inline constexpr double kMaxEnumeratedStates = 1e4;

/// TV distance between the time-t marginal of the chain and the enumerated
/// c-DPP, estimated from `replicas` chains that all start at one uniformly
/// drawn Y0.
double tv_to_stationary(const PsdMatrix& k, Index c, Index t, Index replicas, Rng& rng,
                        const GibbsOptions& options = {}, unsigned threads = 1);

enum class TraceMetric { relative_frobenius, relative_spectral, train_mse, test_mse };

const char* to_string(TraceMetric metric);

/// Held-out data for the KRR metrics of error_trace.
struct KrrEvaluation {
  Vector y_train;
  Matrix k_test_train;  // M x N
  Vector y_test;
  double gamma = 1e-3;
};

struct TraceOptions {
  std::vector<TraceMetric> metrics{TraceMetric::relative_frobenius};
  /// Reference rank for relative errors; -1 means c.
  Index reference_rank = -1;
  std::optional<KrrEvaluation> krr;
  GibbsOptions gibbs;
  ChainInit init = UniformInit{};
};

struct TraceRow {
  Index step = 0;
  std::vector<double> values;  // one per metric, in request order
};

/// One chain from `options.init`, evaluated at steps 0, stride, 2 stride, ...
/// and at the last step. The chain stream matches gibbs_sample for the same rng.
std::vector<TraceRow> error_trace(const PsdMatrix& k, Index c, Index iterations, Index stride, Rng& rng,
                                  const TraceOptions& options = {});

}  // namespace dppnys
