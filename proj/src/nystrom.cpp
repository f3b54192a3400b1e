#include "dppnys/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dppnys/data.hpp"

namespace dppnys {
namespace {

constexpr double kPowerTolerance = 1e-6;
constexpr int kPowerMaxIterations = 500;
constexpr Index kDenseSpectralLimit = 1000;
constexpr double kZeroDenominator = 1e-12;

void check_rank_arguments(const Vector& eigenvalues, Index c, Index k) {
  if (k < 1 || c < k) throw std::invalid_argument("error bound: need c >= k >= 1");
  if (k > eigenvalues.size()) throw std::invalid_argument("error bound: k exceeds N");
}

Vector clipped_descending(const Vector& v) {
  Vector out = v.cwiseMax(0.0);
  std::sort(out.data(), out.data() + out.size(), std::greater<>());
  return out;
}

double spectral_norm_dense(const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(r, Eigen::EigenvaluesOnly);
  const Vector& v = solver.eigenvalues();
  return std::max(std::abs(v(0)), std::abs(v(v.size() - 1)));
}

template <class Apply>
double spectral_norm_power(Index n, Apply apply) {
  Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double estimate = 0.0;
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Vector y = apply(x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    const double next = norm;
    x = y / norm;
    if (std::abs(next - estimate) <= kPowerTolerance * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

NystromApproximation::NystromApproximation(Matrix landmark_columns, const Matrix& core,
                                           std::variant<LandmarkSet, Matrix> landmarks,
                                           double pinv_tol)
    : columns_(std::move(landmark_columns)), landmarks_(std::move(landmarks)) {
  if (core.rows() != columns_.cols() || core.cols() != columns_.cols()) {
    throw std::invalid_argument("NystromApproximation: core size does not match landmark count");
  }
  if (!(pinv_tol >= 0.0)) throw std::invalid_argument("NystromApproximation: pinv_tol must be >= 0");
  const Matrix sym = 0.5 * (core + core.transpose());
  const Spectrum s = eigh(sym);
  const double top = s.values.size() > 0 ? std::max(s.values(0), 0.0) : 0.0;
  Index r = 0;
  while (r < s.values.size() && s.values(r) > pinv_tol * top && s.values(r) > 0.0) ++r;
  projection_ = s.vectors.leftCols(r) * s.values.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
  factor_ = columns_ * projection_;
}

Matrix NystromApproximation::materialize() const {
  const Index n = size();
  Matrix out = Matrix::Zero(n, n);
  out.selfadjointView<Eigen::Lower>().rankUpdate(factor_);
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

Vector NystromApproximation::apply(const Vector& v) const {
  if (v.size() != size()) throw std::invalid_argument("NystromApproximation::apply: size mismatch");
  return factor_ * (factor_.transpose() * v);
}

NystromApproximation build_nystrom(const KernelSource& kernel, const LandmarkSet& c, double pinv_tol) {
  if (c.empty()) throw std::invalid_argument("build_nystrom: need at least one landmark");
  c.check_range(kernel.size());
  Matrix cols = kernel.columns(c.indices());
  Matrix core(c.size(), c.size());
  for (Index a = 0; a < c.size(); ++a) core.row(a) = cols.row(c[a]);
  return NystromApproximation(std::move(cols), core, c, pinv_tol);
}

NystromApproximation build_nystrom(const PsdMatrix& k, const LandmarkSet& c, double pinv_tol) {
  return build_nystrom(DenseKernel(k), c, pinv_tol);
}

NystromApproximation build_nystrom(const RbfKernel& kernel, const CentroidLandmarks& c, double pinv_tol) {
  if (c.centroids.rows() < 1) throw std::invalid_argument("build_nystrom: need at least one centroid");
  if (c.centroids.cols() != kernel.features().cols()) {
    throw std::invalid_argument("build_nystrom: centroid dimension does not match the data");
  }
  Matrix cols = kernel.cross(c.centroids);
  const Matrix core = rbf_kernel(c.centroids, kernel.sigma());
  return NystromApproximation(std::move(cols), core, c.centroids, pinv_tol);
}

double absolute_error(const PsdMatrix& k, const NystromApproximation& approx, Norm norm) {
  const Index n = k.size();
  if (approx.size() != n) throw std::invalid_argument("absolute_error: size mismatch");
  if (n == 0) return 0.0;
  const Matrix& f = approx.factor();
  if (n <= kDenseResidualLimit) {
    const Matrix residual = k.data() - approx.materialize();
    if (norm == Norm::frobenius) return residual.norm();
    if (n <= kDenseSpectralLimit) return spectral_norm_dense(residual);
    return spectral_norm_power(n, [&](const Vector& x) -> Vector { return residual * x; });
  }
  if (norm == Norm::frobenius) {
    const Matrix kf = k.data() * f;
    const double sq = k.data().squaredNorm() - 2.0 * (f.transpose() * kf).trace() +
                      (f.transpose() * f).squaredNorm();
    return std::sqrt(std::max(sq, 0.0));
  }
  return spectral_norm_power(n, [&](const Vector& x) -> Vector {
    return k.data() * x - f * (f.transpose() * x);
  });
}

double relative_error(const PsdMatrix& k, const NystromApproximation& approx, Index rank, Norm norm) {
  const Vector& eig = k.eigenvalues();
  if (rank < 0 || rank > k.size()) throw std::invalid_argument("relative_error: need 0 <= k <= N");
  const double denom = rank_k_truncation_error(eig, rank, norm);
  const double top = eig.size() > 0 ? std::max(eig(0), 0.0) : 0.0;
  if (!(denom > kZeroDenominator * top)) {
    throw std::domain_error("relative_error: reference rank exceeds matrix rank");
  }
  return absolute_error(k, approx, norm) / denom;
}

ErrorReport error_report(const PsdMatrix& k, const NystromApproximation& approx, Index rank) {
  ErrorReport r;
  r.reference_rank = rank < 0 ? approx.landmark_count() : rank;
  r.absolute_frobenius = absolute_error(k, approx, Norm::frobenius);
  r.absolute_spectral = absolute_error(k, approx, Norm::spectral);
  const Vector& eig = k.eigenvalues();
  const double top = eig.size() > 0 ? std::max(eig(0), 0.0) : 0.0;
  const double df = rank_k_truncation_error(eig, r.reference_rank, Norm::frobenius);
  const double ds = rank_k_truncation_error(eig, r.reference_rank, Norm::spectral);
  if (!(df > kZeroDenominator * top) || !(ds > kZeroDenominator * top)) {
    throw std::domain_error("error_report: reference rank exceeds matrix rank");
  }
  r.relative_frobenius = r.absolute_frobenius / df;
  r.relative_spectral = r.absolute_spectral / ds;
  return r;
}

double expected_error_bound(const Vector& eigenvalues, Index c, Index k, Norm norm) {
  check_rank_arguments(eigenvalues, c, k);
  const double n = static_cast<double>(eigenvalues.size());
  const double factor = static_cast<double>(c + 1) / static_cast<double>(c + 1 - k);
  const double rest = n - static_cast<double>(k);
  return norm == Norm::frobenius ? factor * std::sqrt(rest) : factor * rest;
}

double hp_error_bound(const Vector& eigenvalues, Index c, Index k, double delta, Norm norm) {
  check_rank_arguments(eigenvalues, c, k);
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("hp_error_bound: delta must be in (0,1)");
  if (k >= eigenvalues.size()) throw std::domain_error("hp_error_bound: lambda_{k+1} does not exist");
  const Vector lambda = clipped_descending(eigenvalues);
  if (!(lambda(k) > 0.0)) throw std::domain_error("hp_error_bound: degenerate spectrum, lambda_{k+1} = 0");
  double lipschitz;
  if (norm == Norm::frobenius) {
    lipschitz = std::sqrt(lambda.squaredNorm() / lambda.tail(lambda.size() - k).squaredNorm());
  } else {
    lipschitz = lambda(0) / lambda(k);
  }
  return expected_error_bound(eigenvalues, c, k, norm) +
         std::sqrt(8.0 * static_cast<double>(c) * std::log(1.0 / delta)) * lipschitz;
}

std::pair<double, double> esp_ratio_bound_check(const Vector& eigenvalues, Index c, Index k) {
  check_rank_arguments(eigenvalues, c, k);
  if (c + 1 > eigenvalues.size()) throw std::invalid_argument("esp_ratio_bound_check: need c + 1 <= N");
  const EspTable e = elementary_symmetric(eigenvalues, c + 1);
  const Vector lambda = clipped_descending(eigenvalues);
  const double rhs = lambda.tail(lambda.size() - k).sum() / static_cast<double>(c + 1 - k);
  // e_c = 0 forces e_{c+1} = 0; the ratio is taken as 0 there too.
  return {e.sign(c + 1) == 0 ? 0.0 : e.ratio(c), rhs};
}

}  // namespace dppnys
