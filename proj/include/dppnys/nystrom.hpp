#pragma once

#include <utility>
#include <variant>

#include "dppnys/baselines.hpp"
#include "dppnys/kernel_source.hpp"
#include "dppnys/psd_linalg.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// K~ = K_{.,C} K_{C,C}^+ K_{C,.}, stored as the factor F = K_{.,C} V_r S_r^{-1/2}
/// so that K~ = F F^T. The N x N matrix is only formed by `materialize`.
class NystromApproximation {
 public:
  NystromApproximation(Matrix landmark_columns, const Matrix& core,
                       std::variant<LandmarkSet, Matrix> landmarks, double pinv_tol);

  Index size() const { return columns_.rows(); }
  Index landmark_count() const { return columns_.cols(); }
  /// Rank kept after truncating the pseudoinverse of K_{C,C}.
  Index rank() const { return factor_.cols(); }

  const Matrix& landmark_columns() const { return columns_; }
  const Matrix& factor() const { return factor_; }
  /// V_r S_r^{-1/2}: maps kernel values against the landmarks to features.
  const Matrix& projection() const { return projection_; }
  const std::variant<LandmarkSet, Matrix>& landmarks() const { return landmarks_; }

  Matrix materialize() const;
  Vector apply(const Vector& v) const;
  Vector diagonal() const { return factor_.rowwise().squaredNorm(); }
  double trace() const { return factor_.squaredNorm(); }

  /// Feature rows for new points given their kernel values against the
  /// landmarks (M x c); K~(new, train) = features * factor^T.
  Matrix features(const Matrix& kernel_to_landmarks) const { return kernel_to_landmarks * projection_; }

 private:
  Matrix columns_;
  Matrix projection_;
  Matrix factor_;
  std::variant<LandmarkSet, Matrix> landmarks_;
};

inline constexpr double kDefaultPinvTolerance = 1e-12;

NystromApproximation build_nystrom(const KernelSource& kernel, const LandmarkSet& c,
                                   double pinv_tol = kDefaultPinvTolerance);
NystromApproximation build_nystrom(const PsdMatrix& k, const LandmarkSet& c,
                                   double pinv_tol = kDefaultPinvTolerance);
/// Landmarks that are not data points: K_{.,C} and K_{C,C} come from the
/// kernel function.
NystromApproximation build_nystrom(const RbfKernel& kernel, const CentroidLandmarks& c,
                                   double pinv_tol = kDefaultPinvTolerance);

/// Size above which residual norms avoid the materialized residual.
inline constexpr Index kDenseResidualLimit = 6000;

/// ||K - K~|| in the given norm.
double absolute_error(const PsdMatrix& k, const NystromApproximation& approx, Norm norm);

struct ErrorReport {
  double absolute_frobenius = 0.0;
  double absolute_spectral = 0.0;
  double relative_frobenius = 0.0;
  double relative_spectral = 0.0;
  Index reference_rank = 0;
};

/// ||K - K~|| / ||K - K_k||. Throws std::domain_error when the best rank-k
/// error vanishes (reference rank at or above the rank of K).
double relative_error(const PsdMatrix& k, const NystromApproximation& approx, Index rank, Norm norm);

/// Both norms; rank < 0 means k = c.
ErrorReport error_report(const PsdMatrix& k, const NystromApproximation& approx, Index rank = -1);

/// ((c+1)/(c+1-k)) sqrt(N-k) for Frobenius, ((c+1)/(c+1-k)) (N-k) for spectral.
double expected_error_bound(const Vector& eigenvalues, Index c, Index k, Norm norm);

/// expected_error_bound + sqrt(8 c log(1/delta)) times the Lipschitz factor
/// sqrt(sum lambda^2 / sum_{i>k} lambda^2) (Frobenius) or lambda_1/lambda_{k+1}
/// (spectral). Throws std::domain_error when lambda_{k+1} = 0.
double hp_error_bound(const Vector& eigenvalues, Index c, Index k, double delta, Norm norm);

/// (e_{c+1}/e_c, (1/(c+1-k)) sum_{i>k} lambda_i); the ratio is 0 when
/// e_{c+1} = 0, including rank(K) < c.
std::pair<double, double> esp_ratio_bound_check(const Vector& eigenvalues, Index c, Index k);

}  // namespace dppnys
