#include "dppnys/psd_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace dppnys {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPsdTolerance = 1e-10;

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

struct PsdMatrix::Impl {
  std::once_flag once;
  Spectrum spectrum;
};

PsdMatrix::PsdMatrix(Matrix data) : impl_(std::make_shared<Impl>()) {
  if (data.rows() != data.cols()) throw std::invalid_argument("PsdMatrix: matrix is not square");
  if (!data.allFinite()) throw std::invalid_argument("PsdMatrix: non-finite entries");
  if (!is_symmetric(data)) throw std::invalid_argument("PsdMatrix: matrix is not symmetric");
  data_ = std::make_shared<const Matrix>(std::move(data));
}

const Spectrum& PsdMatrix::spectrum() const {
  std::call_once(impl_->once, [this] {
    Spectrum s = eigh(*data_);
    if (s.values.size() > 0) {
      const double top = std::max(s.values(0), 0.0);
      if (s.values(s.values.size() - 1) < -kPsdTolerance * top - 1e-300) {
        throw std::domain_error("PsdMatrix: matrix is not positive semidefinite");
      }
    }
    impl_->spectrum = std::move(s);
  });
  return impl_->spectrum;
}

Vector PsdMatrix::clipped_eigenvalues() const { return eigenvalues().cwiseMax(0.0); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Spectrum eigh(const Matrix& m) {
  if (!is_symmetric(m)) throw std::invalid_argument("eigh: matrix is not symmetric");
  Spectrum s;
  if (m.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
  s.values = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();
  return s;
}

double CholFactor::logdet() const {
  double sum = 0.0;
  for (Index i = 0; i < lower.rows(); ++i) {
    const double d = lower(i, i);
    if (!(d > 0.0)) return kNegInf;
    sum += std::log(d);
  }
  return 2.0 * sum;
}

bool CholFactor::singular() const {
  for (Index i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 0.0)) return true;
  }
  return false;
}

CholFactor cholesky_psd(const Matrix& m, JitterPolicy policy) {
  if (!is_symmetric(m)) throw std::invalid_argument("cholesky_psd: matrix is not symmetric");
  const Index c = m.rows();
  CholFactor f;
  f.order.resize(static_cast<std::size_t>(c));
  for (Index i = 0; i < c; ++i) f.order[static_cast<std::size_t>(i)] = i;
  if (c == 0) return f;

  const double scale = m.trace() / static_cast<double>(c);
  Eigen::LLT<Matrix> llt;
  auto attempt = [&](double jitter) {
    Matrix shifted = m;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) return false;
    const Matrix l = llt.matrixL();
    return (l.diagonal().array() > 0.0).all();
  };

  if (attempt(0.0)) {
    f.lower = llt.matrixL();
    return f;
  }
  if (scale > 0.0) {
    for (double rel = policy.first; rel <= policy.last * (1.0 + 1e-9); rel *= 10.0) {
      if (attempt(rel * scale)) {
        f.lower = llt.matrixL();
        f.jitter = rel * scale;
        return f;
      }
    }
  }
  throw std::domain_error("cholesky_psd: factorization failed at maximum jitter (indefinite input)");
}

CholFactor factor_submatrix(const Matrix& k, std::span<const Index> order) {
  const auto c = static_cast<Index>(order.size());
  CholFactor f;
  f.order.assign(order.begin(), order.end());
  f.lower = Matrix::Zero(c, c);
  for (Index j = 0; j < c; ++j) {
    const Index oj = order[static_cast<std::size_t>(j)];
    double d = k(oj, oj);
    for (Index s = 0; s < j; ++s) d -= f.lower(j, s) * f.lower(j, s);
    if (!(d > 0.0)) {
      f.lower(c - 1, c - 1) = 0.0;
      f.lower(j, j) = 0.0;
      return f;
    }
    const double ljj = std::sqrt(d);
    f.lower(j, j) = ljj;
    for (Index i = j + 1; i < c; ++i) {
      double v = k(order[static_cast<std::size_t>(i)], oj);
      for (Index s = 0; s < j; ++s) v -= f.lower(i, s) * f.lower(j, s);
      f.lower(i, j) = v / ljj;
    }
  }
  return f;
}

double logdet_submatrix(const Matrix& k, std::span<const Index> c) {
  for (Index i : c) {
    if (i < 0 || i >= k.rows()) throw std::out_of_range("logdet_submatrix: index out of range");
  }
  return factor_submatrix(k, c).logdet();
}

double logdet_submatrix(const PsdMatrix& k, const LandmarkSet& c) {
  return logdet_submatrix(k.data(), c.indices());
}

EspTable::EspTable(std::vector<double> log_values) : log_(std::move(log_values)) {}

double EspTable::value(Index j) const { return std::exp(log_value(j)); }

int EspTable::sign(Index j) const { return log_value(j) == kNegInf ? 0 : 1; }

double EspTable::ratio(Index j) const {
  if (sign(j) == 0) throw std::domain_error("EspTable::ratio: e_j is zero");
  return std::exp(log_value(j + 1) - log_value(j));
}

EspTable elementary_symmetric(const Vector& eigenvalues, Index c) {
  const Index n = eigenvalues.size();
  if (c < 0 || c > n) throw std::invalid_argument("elementary_symmetric: need 0 <= c <= N");
  std::vector<double> log_e(static_cast<std::size_t>(c + 1), kNegInf);
  log_e[0] = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double lambda = std::max(eigenvalues(i), 0.0);
    if (lambda == 0.0) continue;
    const double log_lambda = std::log(lambda);
    for (Index j = std::min(i + 1, c); j >= 1; --j) {
      const auto uj = static_cast<std::size_t>(j);
      log_e[uj] = log_add_exp(log_e[uj], log_lambda + log_e[uj - 1]);
    }
  }
  return EspTable(std::move(log_e));
}

Matrix pinv_psd(const Matrix& m, double rel_tol) {
  const Spectrum s = eigh(m);
  const Index n = m.rows();
  if (n == 0) return Matrix(0, 0);
  const double cutoff = rel_tol * std::max(s.values(0), 0.0);
  Vector inv = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (s.values(i) > cutoff && s.values(i) > 0.0) inv(i) = 1.0 / s.values(i);
  }
  return s.vectors * inv.asDiagonal() * s.vectors.transpose();
}

namespace detail {

double swap_in_place(Matrix& lower, std::vector<Index>& order, Index position, Index y_out,
                     const Matrix& k, double old_logdet, double* scratch) {
  const auto c = static_cast<Index>(order.size());
  const Index p = position;
  const double old_pivot = lower(p, p);

  // Column below the removed pivot drives the rank-one update.
  const Index m = c - 1 - p;
  double* x = scratch;
  for (Index i = 0; i < m; ++i) x[i] = lower(p + 1 + i, p);

  for (Index i = p; i < c - 1; ++i) {
    for (Index j = 0; j < p; ++j) lower(i, j) = lower(i + 1, j);
    for (Index j = p; j <= i; ++j) lower(i, j) = lower(i + 1, j + 1);
  }

  double log_growth = 0.0;
  double growth = 1.0;
  for (Index t = 0; t < m; ++t) {
    const Index kk = p + t;
    const double a = lower(kk, kk);
    const double r = std::hypot(a, x[t]);
    const double cs = r / a;
    const double sn = x[t] / a;
    lower(kk, kk) = r;
    for (Index s = t + 1; s < m; ++s) {
      const Index ii = p + s;
      lower(ii, kk) = (lower(ii, kk) + sn * x[s]) / cs;
      x[s] = cs * x[s] - sn * lower(ii, kk);
    }
    growth *= cs;
    if (growth > 1e150) {
      log_growth += std::log(growth);
      growth = 1.0;
    }
  }
  log_growth += std::log(growth);
  double logdet = old_logdet - 2.0 * std::log(old_pivot) + 2.0 * log_growth;

  order.erase(order.begin() + p);
  order.push_back(y_out);

  // Append y_out: forward-solve against the reduced factor.
  const Index last = c - 1;
  double d2 = k(y_out, y_out);
  for (Index j = 0; j < last; ++j) {
    double v = k(order[static_cast<std::size_t>(j)], y_out);
    for (Index s = 0; s < j; ++s) v -= lower(last, s) * lower(j, s);
    v /= lower(j, j);
    lower(last, j) = v;
    d2 -= v * v;
  }
  if (d2 > 0.0) {
    lower(last, last) = std::sqrt(d2);
    logdet += std::log(d2);
  } else {
    lower(last, last) = 0.0;
    logdet = kNegInf;
  }
  return logdet;
}

}  // namespace detail

CholFactor chol_swap_update(const CholFactor& f, const PsdMatrix& k, const LandmarkSet& y,
                            Index y_in, Index y_out) {
  if (!y.contains(y_in)) throw std::invalid_argument("chol_swap_update: y_in is not in Y");
  if (y.contains(y_out)) throw std::invalid_argument("chol_swap_update: y_out is already in Y");
  if (y_out < 0 || y_out >= k.size()) throw std::out_of_range("chol_swap_update: y_out out of range");
  if (static_cast<Index>(f.order.size()) != y.size() || f.size() != y.size()) {
    throw std::invalid_argument("chol_swap_update: factor does not match Y");
  }
  if (f.singular() || f.jitter != 0.0) {
    // Singular or jittered factors cannot be downdated reliably; refactor.
    std::vector<Index> order = f.order;
    order.erase(std::find(order.begin(), order.end(), y_in));
    order.push_back(y_out);
    return factor_submatrix(k.data(), order);
  }
  CholFactor out = f;
  const auto pos = std::find(out.order.begin(), out.order.end(), y_in) - out.order.begin();
  std::vector<double> scratch(static_cast<std::size_t>(out.order.size()));
  detail::swap_in_place(out.lower, out.order, pos, y_out, k.data(), f.logdet(), scratch.data());
  return out;
}

double rank_k_truncation_error(const Vector& eigenvalues, Index k, Norm norm) {
  const Index n = eigenvalues.size();
  if (k < 0 || k > n) throw std::invalid_argument("rank_k_truncation_error: need 0 <= k <= N");
  if (k == n) return 0.0;
  if (norm == Norm::spectral) return std::max(eigenvalues(k), 0.0);
  const Vector tail = eigenvalues.tail(n - k).cwiseMax(0.0);
  return tail.norm();
}

}  // namespace dppnys
