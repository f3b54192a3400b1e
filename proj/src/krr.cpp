#include "dppnys/krr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dppnys/rng.hpp"

namespace dppnys {
namespace {

void check_gamma(double gamma, const char* what) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument(std::string(what) + ": gamma must be positive");
  }
}

void check_targets(const Vector& y, Index n, const char* what) {
  if (y.size() != n) throw std::invalid_argument(std::string(what) + ": target length does not match N");
  if (!y.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite targets");
}

}  // namespace

KrrModel fit_exact(const PsdMatrix& k, const Vector& y, double gamma) {
  check_gamma(gamma, "fit_exact");
  const Index n = k.size();
  check_targets(y, n, "fit_exact");
  Matrix system = k.data();
  system.diagonal().array() += static_cast<double>(n) * gamma;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) throw std::domain_error("fit_exact: ridge system is not positive definite");
  KrrModel model;
  model.alpha = llt.solve(y);
  model.gamma = gamma;
  return model;
}

KrrModel fit_nystrom(std::shared_ptr<const NystromApproximation> approx, const Vector& y, double gamma) {
  if (!approx) throw std::invalid_argument("fit_nystrom: null approximation");
  check_gamma(gamma, "fit_nystrom");
  const Index n = approx->size();
  check_targets(y, n, "fit_nystrom");
  const double mu = static_cast<double>(n) * gamma;
  const Matrix& f = approx->factor();
  KrrModel model;
  model.gamma = gamma;
  if (f.cols() == 0) {
    model.alpha = y / mu;
  } else {
    Matrix core = f.transpose() * f;
    core.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(core);
    if (llt.info() != Eigen::Success) throw std::domain_error("fit_nystrom: core system is not positive definite");
    const Vector w = llt.solve(f.transpose() * y);
    model.alpha = (y - f * w) / mu;
  }
  model.approximation = std::move(approx);
  return model;
}

KrrModel fit_nystrom(const NystromApproximation& approx, const Vector& y, double gamma) {
  return fit_nystrom(std::make_shared<const NystromApproximation>(approx), y, gamma);
}

Vector predict(const KrrModel& model, const Matrix& k_test_train) {
  if (k_test_train.cols() != model.size()) throw std::invalid_argument("predict: column count must equal N");
  return k_test_train * model.alpha;
}

Vector fitted(const KrrModel& model, const PsdMatrix& k) {
  if (model.approximation) return model.approximation->apply(model.alpha);
  if (k.size() != model.size()) throw std::invalid_argument("fitted: kernel size does not match model");
  return k.data() * model.alpha;
}

Matrix nystrom_cross_kernel(const NystromApproximation& approx, const Matrix& k_test_landmarks) {
  if (k_test_landmarks.cols() != approx.landmark_count()) {
    throw std::invalid_argument("nystrom_cross_kernel: column count must equal the landmark count");
  }
  return approx.features(k_test_landmarks) * approx.factor().transpose();
}

double mean_squared_error(const Vector& prediction, const Vector& target) {
  if (prediction.size() != target.size()) throw std::invalid_argument("mean_squared_error: size mismatch");
  if (target.size() == 0) throw std::invalid_argument("mean_squared_error: empty input");
  return (prediction - target).squaredNorm() / static_cast<double>(target.size());
}

RiskReport risk_decomposition(const PsdMatrix& k, const Vector& z, double noise_variance, double gamma) {
  check_gamma(gamma, "risk_decomposition");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("risk_decomposition: noise variance must be >= 0");
  const Index n = k.size();
  if (z.size() != n) throw std::invalid_argument("risk_decomposition: z length does not match N");
  const Spectrum& s = k.spectrum();
  const double mu = static_cast<double>(n) * gamma;
  const Vector lambda = s.values.cwiseMax(0.0);
  const Vector w = s.vectors.transpose() * z;
  const Eigen::ArrayXd denom = (lambda.array() + mu).square();
  RiskReport r;
  r.noise_variance = noise_variance;
  r.bias = static_cast<double>(n) * gamma * gamma * (w.array().square() / denom).sum();
  r.variance = noise_variance / static_cast<double>(n) * (lambda.array().square() / denom).sum();
  r.risk = r.bias + r.variance;
  return r;
}

double krr_risk_ratio_bound(const Vector& eigenvalues, Index c, double gamma, Index n) {
  check_gamma(gamma, "krr_risk_ratio_bound");
  if (c < 0 || c + 1 > eigenvalues.size()) throw std::invalid_argument("krr_risk_ratio_bound: need c + 1 <= N");
  const EspTable e = elementary_symmetric(eigenvalues, c + 1);
  return 1.0 + static_cast<double>(c + 1) / (static_cast<double>(n) * gamma) * e.ratio(c);
}

double krr_bias_hp_bound(const Vector& eigenvalues, Index c, double gamma, Index n, double delta) {
  check_gamma(gamma, "krr_bias_hp_bound");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("krr_bias_hp_bound: delta must be in (0,1)");
  if (c < 0 || c + 1 > eigenvalues.size()) throw std::invalid_argument("krr_bias_hp_bound: need c + 1 <= N");
  const EspTable e = elementary_symmetric(eigenvalues, c + 1);
  const double trace = eigenvalues.cwiseMax(0.0).sum();
  const double spread = std::sqrt(8.0 * static_cast<double>(c) * std::log(1.0 / delta)) * trace;
  return 1.0 + (static_cast<double>(c + 1) * e.ratio(c) + spread) / (static_cast<double>(n) * gamma);
}

double nu_C(const PsdMatrix& k, const LandmarkSet& c) {
  c.check_range(k.size());
  if (c.empty()) return k.trace();
  const NystromApproximation approx = build_nystrom(k, c);
  return std::max(k.trace() - approx.trace(), 0.0);
}

GridResult grid_search_gamma(const PsdMatrix& k, const Vector& y, const std::vector<double>& gammas,
                             Index folds, std::uint64_t seed) {
  const Index n = k.size();
  check_targets(y, n, "grid_search_gamma");
  if (gammas.empty()) throw std::invalid_argument("grid_search_gamma: empty gamma grid");
  if (folds < 2 || folds > n) throw std::invalid_argument("grid_search_gamma: need 2 <= folds <= N");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed, hash_label("cv-folds"));
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }

  GridResult out;
  out.gammas = gammas;
  double best = std::numeric_limits<double>::infinity();
  for (double gamma : gammas) {
    check_gamma(gamma, "grid_search_gamma");
    double total = 0.0;
    for (Index f = 0; f < folds; ++f) {
      std::vector<Index> train, test;
      for (Index i = 0; i < n; ++i) (i % folds == f ? test : train).push_back(perm[static_cast<std::size_t>(i)]);
      const auto nt = static_cast<Index>(train.size());
      Matrix ktt(nt, nt), kvt(static_cast<Index>(test.size()), nt);
      Vector yt(nt), yv(static_cast<Index>(test.size()));
      for (Index a = 0; a < nt; ++a) {
        yt(a) = y(train[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < nt; ++b) ktt(a, b) = k(train[static_cast<std::size_t>(a)], train[static_cast<std::size_t>(b)]);
      }
      for (Index a = 0; a < yv.size(); ++a) {
        yv(a) = y(test[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < nt; ++b) kvt(a, b) = k(test[static_cast<std::size_t>(a)], train[static_cast<std::size_t>(b)]);
      }
      const KrrModel m = fit_exact(PsdMatrix(std::move(ktt)), yt, gamma);
      total += mean_squared_error(predict(m, kvt), yv);
    }
    const double score = total / static_cast<double>(folds);
    out.scores.push_back(score);
    if (score < best) {
      best = score;
      out.best_gamma = gamma;
    }
  }
  return out;
}

}  // namespace dppnys
