#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dppnys {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Norm { frobenius, spectral };

std::string to_string(Norm norm);

/// Sorted, duplicate-free subset of the ground set [0, N).
class LandmarkSet {
 public:
  LandmarkSet() = default;

  /// Sorts the input; throws std::invalid_argument on duplicates, negative
  /// indices, or indices >= ground_size (when ground_size >= 0).
  explicit LandmarkSet(std::vector<Index> indices, Index ground_size = -1);
  LandmarkSet(std::initializer_list<Index> indices);

  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(Index i) const;
  Index operator[](Index k) const { return indices_[static_cast<std::size_t>(k)]; }

  std::span<const Index> indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Throws std::out_of_range if any index is outside [0, ground_size).
  void check_range(Index ground_size) const;

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
  friend auto operator<=>(const LandmarkSet& a, const LandmarkSet& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<Index> indices_;
};

std::string to_string(const LandmarkSet& set);

/// Binomial coefficient as a double (exact up to 2^53).
double binomial(Index n, Index k);

}  // namespace dppnys
