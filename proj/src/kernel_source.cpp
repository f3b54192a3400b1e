#include "dppnys/kernel_source.hpp"

#include <stdexcept>

#include "dppnys/data.hpp"

namespace dppnys {

Matrix DenseKernel::columns(std::span<const Index> cols) const {
  Matrix out(k_.size(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= k_.size()) throw std::out_of_range("DenseKernel: column out of range");
    out.col(static_cast<Index>(j)) = k_.data().col(cols[j]);
  }
  return out;
}

RbfKernel::RbfKernel(Matrix features, double sigma) : x_(std::move(features)), sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("RbfKernel: sigma must be positive");
}

Matrix RbfKernel::columns(std::span<const Index> cols) const {
  Matrix points(static_cast<Index>(cols.size()), x_.cols());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= x_.rows()) throw std::out_of_range("RbfKernel: column out of range");
    points.row(static_cast<Index>(j)) = x_.row(cols[j]);
  }
  Matrix out = rbf_kernel(x_, points, sigma_);
  // Exact ones on the diagonal entries, matching the symmetric builder.
  for (std::size_t j = 0; j < cols.size(); ++j) out(cols[j], static_cast<Index>(j)) = 1.0;
  return out;
}

Matrix RbfKernel::cross(const Matrix& points) const { return rbf_kernel(x_, points, sigma_); }

}  // namespace dppnys
