#pragma once

// Internal helpers shared by the samplers.

#include <span>
#include <stdexcept>

#include "dppnys/rng.hpp"
#include "dppnys/types.hpp"

namespace dppnys::detail {

/// Index drawn with probability weights[i] / total. Falls back to the last
/// positive weight if round-off pushes the draw past the end.
inline Index sample_discrete(std::span<const double> weights, double total, Rng& rng) {
  if (!(total > 0.0)) throw std::invalid_argument("sample_discrete: weights sum to zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  Index last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      acc += weights[i];
      last_positive = static_cast<Index>(i);
      if (target < acc) return last_positive;
    }
  }
  return last_positive;
}

}  // namespace dppnys::detail

#include <numeric>
#include <vector>

namespace dppnys::detail {

/// c distinct indices from [0, n), uniformly, via a partial Fisher-Yates
/// shuffle. Returned in draw order.
inline std::vector<Index> uniform_subset(Index n, Index c, Rng& rng) {
  if (c < 0 || c > n) throw std::invalid_argument("uniform subset: need 0 <= c <= N");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < c; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  perm.resize(static_cast<std::size_t>(c));
  return perm;
}

}  // namespace dppnys::detail
