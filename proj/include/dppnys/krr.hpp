#pragma once

#include <memory>
#include <vector>

#include "dppnys/nystrom.hpp"
#include "dppnys/psd_linalg.hpp"
#include "dppnys/types.hpp"

namespace dppnys {

/// Ridge coefficients alpha with (K + N gamma I) alpha = y, for the exact
/// kernel or a Nystrom approximation of it.
struct KrrModel {
  Vector alpha;
  double gamma = 0.0;
  /// Set for models fitted on K~.
  std::shared_ptr<const NystromApproximation> approximation;

  Index size() const { return alpha.size(); }
};

KrrModel fit_exact(const PsdMatrix& k, const Vector& y, double gamma);

/// Low-rank solve through the c x c system (F^T F + N gamma I); K~ is never
/// formed.
KrrModel fit_nystrom(std::shared_ptr<const NystromApproximation> approx, const Vector& y, double gamma);
KrrModel fit_nystrom(const NystromApproximation& approx, const Vector& y, double gamma);

/// K_test_train * alpha; K_test_train is M x N.
Vector predict(const KrrModel& model, const Matrix& k_test_train);

/// Fitted values on the training points.
Vector fitted(const KrrModel& model, const PsdMatrix& k);

/// K~(test, train) for a Nystrom model, from the kernel values between the
/// test points and the landmarks (M x c).
Matrix nystrom_cross_kernel(const NystromApproximation& approx, const Matrix& k_test_landmarks);

double mean_squared_error(const Vector& prediction, const Vector& target);

struct RiskReport {
  double bias = 0.0;
  double variance = 0.0;
  double risk = 0.0;
  double noise_variance = 0.0;
};

/// bias = N gamma^2 z^T (K + N gamma I)^{-2} z and
/// variance = (sigma^2 / N) tr(K^2 (K + N gamma I)^{-2}), from eigh(K).
RiskReport risk_decomposition(const PsdMatrix& k, const Vector& z, double noise_variance, double gamma);

/// 1 + ((c+1) / (N gamma)) e_{c+1} / e_c.
double krr_risk_ratio_bound(const Vector& eigenvalues, Index c, double gamma, Index n);

/// 1 + (1 / (N gamma)) ((c+1) e_{c+1} / e_c + sqrt(8 c log(1/delta)) tr K).
double krr_bias_hp_bound(const Vector& eigenvalues, Index c, double gamma, Index n, double delta);

/// tr(K) - tr(K~) for the column landmarks C; tr(K) when C is empty.
double nu_C(const PsdMatrix& k, const LandmarkSet& c);

struct GridResult {
  double best_gamma = 0.0;
  std::vector<double> gammas;
  std::vector<double> scores;  // mean held-out MSE per gamma
};

/// k-fold cross-validation of exact KRR over a gamma grid. Folds come from a
/// seeded permutation; ties keep the first gamma.
GridResult grid_search_gamma(const PsdMatrix& k, const Vector& y, const std::vector<double>& gammas,
                             Index folds, std::uint64_t seed);

}  // namespace dppnys
