#include "dppnys/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dppnys {

std::string to_string(Norm norm) {
  return norm == Norm::frobenius ? "frobenius" : "spectral";
}

LandmarkSet::LandmarkSet(std::vector<Index> indices, Index ground_size)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("landmark set contains duplicate indices");
  }
  if (!indices_.empty() && indices_.front() < 0) {
    throw std::invalid_argument("landmark set contains a negative index");
  }
  if (ground_size >= 0) check_range(ground_size);
}

LandmarkSet::LandmarkSet(std::initializer_list<Index> indices)
    : LandmarkSet(std::vector<Index>(indices)) {}

bool LandmarkSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

void LandmarkSet::check_range(Index ground_size) const {
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= ground_size)) {
    throw std::out_of_range("landmark index out of range for ground set of size " +
                            std::to_string(ground_size));
  }
}

std::string to_string(const LandmarkSet& set) {
  std::ostringstream out;
  out << '{';
  for (Index k = 0; k < set.size(); ++k) {
    if (k) out << ',';
    out << set[k];
  }
  out << '}';
  return out.str();
}

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (Index i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(result);
}

}  // namespace dppnys
