#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "dppnys/psd_linalg.hpp"
#include "dppnys/rng.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// The c-DPP over all c-subsets of [N], subsets in lexicographic order.
struct SubsetDistribution {
  Index ground_size = 0;
  Index cardinality = 0;
  std::vector<LandmarkSet> subsets;
  std::vector<double> probabilities;
  /// log of sum_{|S|=c} det(K_{S,S}).
  double log_normalizer = 0.0;

  /// Position of `s` in `subsets` (combinatorial rank).
  Index index_of(const LandmarkSet& s) const;
  double probability(const LandmarkSet& s) const { return probabilities[static_cast<std::size_t>(index_of(s))]; }
  /// Per-element inclusion probabilities.
  Vector marginals() const;
};

/// Brute-force c-DPP: Pr(C) = det(K_{C,C}) / sum_{|S|=c} det(K_{S,S}).
/// Throws std::length_error when C(N, c) exceeds `max_subsets`.
SubsetDistribution enumerate_cdpp(const PsdMatrix& k, Index c, double max_subsets = 1e6);

/// Exact c-DPP sample from the eigendecomposition: eigenvectors are selected
/// through the elementary-symmetric-polynomial recurrence, then points are
/// drawn one at a time from the shrinking projection. Eigenvalues below
/// 1e-12 * max count as zero; throws std::domain_error when c exceeds the
/// resulting rank.
LandmarkSet sample_cdpp_exact(const PsdMatrix& k, Index c, Rng& rng);

struct GibbsOptions {
  /// Hold with probability 1/2 each step.
  bool lazy = true;
  /// The cached factor is rebuilt from scratch every this many steps.
  Index refresh_interval = 1000;
};

/// State of the swap chain for one replica.
class GibbsState {
 public:
  GibbsState(const PsdMatrix& k, const LandmarkSet& initial, Rng rng);

  LandmarkSet landmarks() const;
  const CholFactor& factor() const { return factor_; }
  /// log det(K_{Y,Y}); -infinity for a singular state.
  double logdet() const { return logdet_; }
  Index step() const { return step_; }
  Index cardinality() const { return static_cast<Index>(members_.size()); }
  Index ground_size() const { return static_cast<Index>(in_set_.size()); }
  bool contains(Index i) const { return in_set_[static_cast<std::size_t>(i)] != 0; }
  Rng& rng() { return rng_; }

  /// Members in factor order, and the complement.
  std::span<const Index> members() const { return members_; }
  std::span<const Index> outside() const { return outside_; }

 private:
  friend double gibbs_swap_prob(const PsdMatrix&, const GibbsState&, Index, Index);
  friend void gibbs_step(GibbsState&, const PsdMatrix&, const GibbsOptions&);

  void rebuild(const Matrix& k);
  // Fills the candidate buffers for swapping members_[pos_in] with
  // outside_[pos_out] and returns the acceptance probability.
  double propose(const Matrix& k, Index pos_in, Index pos_out);
  void accept_candidate(Index pos_in, Index pos_out);
  double jittered_logdet(const Matrix& k, std::span<const Index> set) const;

  std::vector<Index> members_;
  std::vector<Index> outside_;
  std::vector<Index> slot_;  // position in members_ or outside_
  std::vector<char> in_set_;
  CholFactor factor_;
  double logdet_ = 0.0;
  double jitter_ = 0.0;  // only used to rank singular states
  Index step_ = 0;
  Rng rng_;

  Matrix candidate_lower_;
  std::vector<Index> candidate_order_;
  double candidate_logdet_ = 0.0;
  std::vector<double> scratch_;
};

/// q = det(K_{Y'}) / (det(K_{Y'}) + det(K_Y)) for Y' = Y + y_out - y_in,
/// evaluated as a logistic function of the log-determinant difference.
double gibbs_swap_prob(const PsdMatrix& k, const GibbsState& state, Index y_in, Index y_out);

/// One step of the (lazy) swap chain; the step counter always advances by 1.
void gibbs_step(GibbsState& state, const PsdMatrix& k, const GibbsOptions& options = {});

struct UniformInit {};
struct KmeansppInit {
  std::reference_wrapper<const Matrix> features;
};
using ChainInit = std::variant<UniformInit, KmeansppInit, LandmarkSet>;

LandmarkSet initial_landmarks(const ChainInit& init, Index n, Index c, Rng& rng);

inline constexpr Index kDefaultGibbsIterations = 3000;

/// Runs the chain `iterations` steps from the initializer and returns the
/// final set. The initializer consumes `rng`; the chain runs on a stream
/// split from it.
LandmarkSet gibbs_sample(const PsdMatrix& k, Index c, Index iterations, const ChainInit& init,
                         Rng& rng, const GibbsOptions& options = {});

/// Independent chains from a common start; replica r uses Rng(seed).split(r).
/// The result does not depend on `threads`.
std::vector<LandmarkSet> run_gibbs_replicas(const PsdMatrix& k, const LandmarkSet& start,
                                            Index steps, Index replicas, std::uint64_t seed,
                                            const GibbsOptions& options = {},
                                            unsigned threads = 1);

/// D^2 seeding over the rows of `x`. Rows at zero distance from a chosen row
/// get zero weight; if every remaining weight is zero the rest are drawn
/// uniformly from the unchosen rows.
LandmarkSet kmeanspp_init(const Matrix& x, Index c, Rng& rng);

}  // namespace dppnys
