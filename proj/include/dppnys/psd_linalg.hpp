#pragma once

#include <memory>
#include <vector>

#include "dppnys/types.hpp"

namespace dppnys {

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
struct Spectrum {
  Vector values;
  Matrix vectors;  // column j pairs with values(j)
};

/// Dense symmetric positive semidefinite matrix.
///
/// Immutable after construction. The eigendecomposition is computed on first
/// use and cached; copies share the cache, and concurrent readers are safe.
class PsdMatrix {
 public:
  /// Throws std::invalid_argument when `data` is not square or not symmetric
  /// to 1e-12 relative to its largest entry.
  explicit PsdMatrix(Matrix data);

  Index size() const { return data_->rows(); }
  const Matrix& data() const { return *data_; }
  double operator()(Index i, Index j) const { return (*data_)(i, j); }
  double trace() const { return data_->trace(); }

  /// Cached eigendecomposition. Throws std::domain_error if the smallest
  /// eigenvalue is below -1e-10 * largest.
  const Spectrum& spectrum() const;
  const Vector& eigenvalues() const { return spectrum().values; }

  /// Eigenvalues clipped at zero from below.
  Vector clipped_eigenvalues() const;

 private:
  struct Impl;
  std::shared_ptr<const Matrix> data_;
  std::shared_ptr<Impl> impl_;
};

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// Symmetric eigendecomposition with descending eigenvalues.
Spectrum eigh(const Matrix& m);

/// Lower Cholesky factor of K_{Y,Y} + jitter * I with Y listed in `order`.
///
/// A factor whose last pivot is exactly zero marks a singular submatrix; its
/// log-determinant is -infinity.
struct CholFactor {
  Matrix lower;
  double jitter = 0.0;
  std::vector<Index> order;

  Index size() const { return lower.rows(); }
  double logdet() const;
  bool singular() const;
};

/// Jitter escalation in decades, relative to trace(M) / c.
struct JitterPolicy {
  double first = 1e-12;
  double last = 1e-6;
};

/// Cholesky factor of a PSD matrix, adding the smallest jitter from the policy
/// that makes the factorization succeed (zero jitter is tried first). Throws
/// std::domain_error once the largest jitter fails.
CholFactor cholesky_psd(const Matrix& m, JitterPolicy policy = {});

/// Factor of K_{Y,Y} for Y given in `order`, zero jitter. On failure the
/// factor is truncated at the failing pivot and its last pivot set to 0, so
/// `singular()` is true.
CholFactor factor_submatrix(const Matrix& k, std::span<const Index> order);

/// log det(K_{C,C}); -infinity when the zero-jitter Cholesky fails.
double logdet_submatrix(const PsdMatrix& k, const LandmarkSet& c);
double logdet_submatrix(const Matrix& k, std::span<const Index> c);

/// Elementary symmetric polynomials e_0..e_c of a nonnegative sequence,
/// stored as logarithms.
class EspTable {
 public:
  EspTable() = default;
  explicit EspTable(std::vector<double> log_values);

  Index max_order() const { return static_cast<Index>(log_.size()) - 1; }
  double log_value(Index j) const { return log_[static_cast<std::size_t>(j)]; }
  double value(Index j) const;
  /// 1 for positive entries, 0 for exact zeros.
  int sign(Index j) const;
  /// e_{j+1} / e_j; throws std::domain_error when e_j = 0.
  double ratio(Index j) const;

 private:
  std::vector<double> log_;
};

/// e_0(lambda)..e_c(lambda) by the two-term recurrence over the eigenvalues,
/// carried in log space. Negative inputs are clipped to zero.
EspTable elementary_symmetric(const Vector& eigenvalues, Index c);

/// Moore-Penrose pseudoinverse; eigenvalues below rel_tol * max are dropped.
Matrix pinv_psd(const Matrix& m, double rel_tol = 1e-12);

/// Factor of K over Y u {y_out} \ {y_in}, in O(c^2): the row of y_in is
/// removed with a rank-one update of the trailing block and y_out is
/// appended. A singular result is reported through a zero last pivot.
CholFactor chol_swap_update(const CholFactor& f, const PsdMatrix& k, const LandmarkSet& y,
                            Index y_in, Index y_out);

namespace detail {

/// In-place worker behind chol_swap_update. `position` indexes `order`.
/// Returns the log-determinant of the new factor given the old one.
/// `scratch` must hold at least order.size() doubles.
double swap_in_place(Matrix& lower, std::vector<Index>& order, Index position, Index y_out,
                     const Matrix& k, double old_logdet, double* scratch);

}  // namespace detail

/// ||K - K_k|| for the best rank-k approximation, from descending eigenvalues.
double rank_k_truncation_error(const Vector& eigenvalues, Index k, Norm norm);

}  // namespace dppnys
