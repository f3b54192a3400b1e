#include <doctest.h>

#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "dppnys/psd_linalg.hpp"
#include "dppnys/rng.hpp"

using namespace dppnys;

TEST_CASE("eigh") {
  Matrix d = Vector(Eigen::Vector3d(3, 1, 2)).asDiagonal();
  Spectrum s = eigh(d);
  CHECK(s.values(0) == doctest::Approx(3));
  CHECK(s.values(1) == doctest::Approx(2));
  CHECK(s.values(2) == doctest::Approx(1));
  CHECK(eigh(Matrix::Identity(4, 4)).values.isOnes(1e-14));

  Rng rng(1);
  Matrix k = oracle::random_psd(6, rng);
  Spectrum e = eigh(k);
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(6, 6)).norm() <= 1e-8);
  CHECK((k - e.vectors * e.values.asDiagonal() * e.vectors.transpose()).norm() <= 1e-8 * k.norm());
  for (Index i = 1; i < 6; ++i) CHECK(e.values(i - 1) >= e.values(i));

  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigh(bad), std::invalid_argument);
  CHECK_THROWS_AS(PsdMatrix{bad}, std::invalid_argument);
}

TEST_CASE("PsdMatrix rejects indefinite input") {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = -1.0;
  PsdMatrix p(m);
  CHECK_THROWS_AS(p.spectrum(), std::domain_error);
}

TEST_CASE("cholesky_psd") {
  CholFactor id = cholesky_psd(Matrix::Identity(3, 3));
  CHECK(id.jitter == 0.0);
  CHECK(id.lower.isIdentity(0.0));

  Matrix rank1 = Matrix::Ones(2, 2);
  CholFactor f = cholesky_psd(rank1);
  CHECK(f.jitter > 0.0);
  CHECK(f.lower.diagonal().minCoeff() > 0.0);
  CHECK((f.lower * f.lower.transpose() - rank1 - f.jitter * Matrix::Identity(2, 2)).norm() <= 1e-8 * 2.0);

  Rng rng(2);
  Matrix m = oracle::random_psd(5, rng);
  CholFactor g = cholesky_psd(m);
  CHECK((g.lower * g.lower.transpose() - m - g.jitter * Matrix::Identity(5, 5)).norm() <= 1e-8 * m.trace());

  Matrix indef = Matrix::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(cholesky_psd(indef), std::domain_error);
}

TEST_CASE("elementary_symmetric") {
  EspTable t = elementary_symmetric(Eigen::Vector3d(1, 2, 3), 3);
  CHECK(t.value(0) == doctest::Approx(1.0));
  CHECK(t.value(1) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(t.value(2) == doctest::Approx(11.0).epsilon(1e-14));
  CHECK(t.value(3) == doctest::Approx(6.0).epsilon(1e-14));

  EspTable ones = elementary_symmetric(Vector::Ones(12), 12);
  for (Index c = 0; c <= 12; ++c) CHECK(ones.value(c) == doctest::Approx(binomial(12, c)).epsilon(1e-12));

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Vector lambda(8);
    for (Index i = 0; i < 8; ++i) lambda(i) = rng.uniform() * 3.0;
    EspTable e = elementary_symmetric(lambda, 8);
    for (Index c = 0; c <= 8; ++c) {
      const double brute = oracle::esp_brute(lambda, c);
      CHECK(std::abs(e.value(c) - brute) <= 1e-10 * brute);
    }
  }

  EspTable rank2 = elementary_symmetric(Eigen::Vector4d(2, 1, 0, 0), 4);
  CHECK(rank2.sign(2) == 1);
  CHECK(rank2.sign(3) == 0);
  CHECK(rank2.value(3) == 0.0);
  CHECK_THROWS_AS(rank2.ratio(3), std::domain_error);
  CHECK_THROWS_AS(elementary_symmetric(Vector::Ones(3), 4), std::invalid_argument);

  EspTable clipped = elementary_symmetric(Eigen::Vector3d(1, 1, -1e-14), 3);
  CHECK(clipped.sign(3) == 0);
}

TEST_CASE("elementary_symmetric extreme scales stay finite") {
  Vector huge = Vector::Constant(10000, 1e300);
  EspTable t = elementary_symmetric(huge, 50);
  for (Index c = 0; c <= 50; ++c) {
    CHECK(std::isfinite(t.log_value(c)));
    const double expected = c * std::log(1e300) + std::lgamma(10001.0) - std::lgamma(c + 1.0) - std::lgamma(10001.0 - c);
    CHECK(t.log_value(c) == doctest::Approx(expected).epsilon(1e-10));
  }
  Vector tiny = Vector::Constant(1000, 1e-300);
  EspTable s = elementary_symmetric(tiny, 20);
  CHECK(std::isfinite(s.log_value(20)));
  CHECK(s.sign(20) == 1);
}

TEST_CASE("logdet_submatrix") {
  Matrix d = Vector(Eigen::Vector3d(1, 2, 3)).asDiagonal();
  PsdMatrix k(d);
  CHECK(logdet_submatrix(k, LandmarkSet{0, 1}) == doctest::Approx(std::log(2.0)));
  CHECK(logdet_submatrix(k, LandmarkSet{}) == 0.0);
  CHECK_THROWS_AS(logdet_submatrix(d, std::vector<Index>{0, 5}), std::out_of_range);

  Matrix dup = Matrix::Identity(3, 3);
  dup(0, 1) = dup(1, 0) = 1.0;
  CHECK(logdet_submatrix(PsdMatrix(dup), LandmarkSet{0, 1}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("pinv_psd") {
  Matrix d = Eigen::Vector2d(2, 0).asDiagonal();
  Matrix p = pinv_psd(d);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(std::abs(p(1, 1)) <= 1e-15);
  CHECK((pinv_psd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() <= 1e-14);

  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix m = oracle::random_psd(5, 3, rng);
    Matrix mp = pinv_psd(m);
    const double scale = m.norm();
    CHECK((m * mp * m - m).norm() <= 1e-8 * scale);
    CHECK((mp * m * mp - mp).norm() <= 1e-8 * mp.norm());
    CHECK((m * mp - (m * mp).transpose()).norm() <= 1e-8);
    CHECK((mp * m - (mp * m).transpose()).norm() <= 1e-8);
  }
}

TEST_CASE("chol_swap_update") {
  PsdMatrix id(Matrix::Identity(6, 6));
  LandmarkSet y{0, 2, 4};
  CholFactor f = factor_submatrix(id.data(), y.indices());
  CholFactor g = chol_swap_update(f, id, y, 2, 5);
  CHECK(g.lower.isIdentity(1e-15));

  Rng rng(11);
  Matrix km = oracle::random_psd(12, rng);
  PsdMatrix k(km);
  LandmarkSet s{1, 3, 4, 7, 9, 10};
  CholFactor fs = factor_submatrix(km, s.indices());
  CholFactor swapped = chol_swap_update(fs, k, s, 4, 6);
  std::vector<Index> ordered(swapped.order.begin(), swapped.order.end());
  Matrix direct = oracle::submatrix(km, ordered);
  CHECK((swapped.lower * swapped.lower.transpose() - direct).norm() <= 1e-8 * direct.norm());
  LandmarkSet after({1, 3, 6, 7, 9, 10});
  CHECK(swapped.logdet() == doctest::Approx(std::log(oracle::det(km, {1, 3, 6, 7, 9, 10}))).epsilon(1e-10));

  CholFactor back = chol_swap_update(swapped, k, after, 6, 4);
  CHECK(std::abs(back.logdet() - fs.logdet()) <= 1e-8);

  CHECK_THROWS_AS(chol_swap_update(fs, k, s, 5, 6), std::invalid_argument);
  CHECK_THROWS_AS(chol_swap_update(fs, k, s, 4, 3), std::invalid_argument);
}

TEST_CASE("chol_swap_update random sequences") {
  Rng rng(12);
  double worst = 0.0;
  for (int seq = 0; seq < 20; ++seq) {
    const Index n = 15;
    const Index c = 2 + Index(rng.below(6));
    Matrix km = oracle::random_psd(n, rng) + 0.1 * Matrix::Identity(n, n);
    PsdMatrix k(km);
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[std::size_t(i)] = i;
    for (Index i = n - 1; i > 0; --i) std::swap(perm[std::size_t(i)], perm[rng.below(std::uint64_t(i + 1))]);
    LandmarkSet y(std::vector<Index>(perm.begin(), perm.begin() + c));
    CholFactor f = factor_submatrix(km, y.indices());
    for (int step = 0; step < 50; ++step) {
      std::vector<Index> out;
      for (Index i = 0; i < n; ++i)
        if (!y.contains(i)) out.push_back(i);
      const Index yin = y[Index(rng.below(std::uint64_t(c)))];
      const Index yout = out[rng.below(out.size())];
      f = chol_swap_update(f, k, y, yin, yout);
      std::vector<Index> next(y.begin(), y.end());
      *std::find(next.begin(), next.end(), yin) = yout;
      y = LandmarkSet(next);
      const double direct = std::log(oracle::det(km, std::vector<Index>(y.begin(), y.end())));
      worst = std::max(worst, std::abs(f.logdet() - direct) / std::max(1.0, std::abs(direct)));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("rank_k_truncation_error") {
  Eigen::Vector3d lambda(3, 2, 1);
  CHECK(rank_k_truncation_error(lambda, 1, Norm::spectral) == 2.0);
  CHECK(rank_k_truncation_error(lambda, 1, Norm::frobenius) == doctest::Approx(std::sqrt(5.0)));
  CHECK(rank_k_truncation_error(lambda, 3, Norm::spectral) == 0.0);
  CHECK(rank_k_truncation_error(lambda, 3, Norm::frobenius) == 0.0);
}
