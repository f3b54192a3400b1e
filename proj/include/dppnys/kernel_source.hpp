#pragma once

#include "dppnys/psd_linalg.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// Column access to an N x N kernel matrix, without requiring it to be stored.
class KernelSource {
 public:
  virtual ~KernelSource() = default;
  virtual Index size() const = 0;
  virtual Vector diagonal() const = 0;
  /// K_{., cols}: N x |cols|.
  virtual Matrix columns(std::span<const Index> cols) const = 0;
};

/// Backed by a materialized kernel matrix.
class DenseKernel final : public KernelSource {
 public:
  explicit DenseKernel(PsdMatrix k) : k_(std::move(k)) {}
  Index size() const override { return k_.size(); }
  Vector diagonal() const override { return k_.data().diagonal(); }
  Matrix columns(std::span<const Index> cols) const override;
  const PsdMatrix& matrix() const { return k_; }

 private:
  PsdMatrix k_;
};

/// Gaussian kernel evaluated on demand from the feature rows.
class RbfKernel final : public KernelSource {
 public:
  RbfKernel(Matrix features, double sigma);
  Index size() const override { return x_.rows(); }
  Vector diagonal() const override { return Vector::Ones(x_.rows()); }
  Matrix columns(std::span<const Index> cols) const override;

  /// k(x_i, p_j) for arbitrary points p (rows of `points`): N x M.
  Matrix cross(const Matrix& points) const;
  const Matrix& features() const { return x_; }
  double sigma() const { return sigma_; }

 private:
  Matrix x_;
  double sigma_;
};

}  // namespace dppnys
