#include <doctest.h>

#include <cmath>
#include <map>

#include "../oracles.hpp"
#include "dppnys/dpp_samplers.hpp"
#include "dppnys/psd_linalg.hpp"

using namespace dppnys;

namespace {

// Lazy swap chain written out from its definition.
Matrix transition_oracle(const Matrix& k, Index c, bool lazy) {
  oracle::Enumerated e = oracle::cdpp(k, c);
  const Index n = k.rows();
  const Index states = Index(e.subsets.size());
  std::map<std::vector<Index>, Index> rank;
  for (Index s = 0; s < states; ++s) rank[e.subsets[std::size_t(s)]] = s;
  Matrix p = Matrix::Zero(states, states);
  const double move = (lazy ? 0.5 : 1.0) / double(c * (n - c));
  for (Index s = 0; s < states; ++s) {
    const auto& y = e.subsets[std::size_t(s)];
    const double dy = oracle::det(k, y);
    for (Index v : y)
      for (Index u = 0; u < n; ++u) {
        if (std::find(y.begin(), y.end(), u) != y.end()) continue;
        std::vector<Index> next = y;
        *std::find(next.begin(), next.end(), v) = u;
        std::sort(next.begin(), next.end());
        const double dn = oracle::det(k, next);
        const double q = dn / (dn + dy);
        p(s, rank[next]) += move * q;
      }
    p(s, s) += 1.0 - p.row(s).sum();
  }
  return p;
}

}  // namespace

TEST_CASE("enumerate_cdpp") {
  PsdMatrix d(Matrix(Vector(Eigen::Vector3d(1, 2, 3)).asDiagonal()));
  SubsetDistribution dist = enumerate_cdpp(d, 2);
  CHECK(dist.probability(LandmarkSet{0, 1}) == doctest::Approx(2.0 / 11.0));
  CHECK(dist.probability(LandmarkSet{0, 2}) == doctest::Approx(3.0 / 11.0));
  CHECK(dist.probability(LandmarkSet{1, 2}) == doctest::Approx(6.0 / 11.0));
  CHECK(std::exp(dist.log_normalizer) == doctest::Approx(11.0));

  SubsetDistribution uni = enumerate_cdpp(PsdMatrix(Matrix::Identity(6, 6)), 3);
  CHECK(uni.subsets.size() == 20);
  for (double p : uni.probabilities) CHECK(p == doctest::Approx(1.0 / 20.0).epsilon(1e-12));

  Rng rng(21);
  Matrix km = oracle::random_psd(8, rng);
  PsdMatrix k(km);
  SubsetDistribution r = enumerate_cdpp(k, 3);
  EspTable esp = elementary_symmetric(k.clipped_eigenvalues(), 3);
  CHECK(std::abs(std::exp(r.log_normalizer - esp.log_value(3)) - 1.0) <= 1e-10);
  double total = 0.0;
  for (double p : r.probabilities) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  oracle::Enumerated o = oracle::cdpp(km, 3);
  for (std::size_t i = 0; i < o.subsets.size(); ++i) {
    CHECK(r.subsets[i] == LandmarkSet(o.subsets[i]));
    CHECK(std::abs(r.probabilities[i] - o.probs[i]) <= 1e-10);
  }
  CHECK_THROWS_AS(enumerate_cdpp(PsdMatrix(Matrix::Identity(40, 40)), 20), std::length_error);
}

TEST_CASE("sample_cdpp_exact") {
  PsdMatrix d(Matrix(Vector(Eigen::Vector3d(1, 2, 3)).asDiagonal()));
  Rng rng(22);
  for (int i = 0; i < 20; ++i) CHECK(sample_cdpp_exact(d, 3, rng) == LandmarkSet{0, 1, 2});

  PsdMatrix id(Matrix::Identity(4, 4));
  std::map<LandmarkSet, int> counts;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) ++counts[sample_cdpp_exact(id, 2, rng)];
  CHECK(counts.size() == 6);
  for (auto& [s, n] : counts) CHECK(std::abs(double(n) / draws - 1.0 / 6.0) <= 0.01);

  Rng r2(23);
  PsdMatrix rank2(oracle::random_psd(5, 2, r2));
  CHECK_THROWS_AS(sample_cdpp_exact(rank2, 3, rng), std::domain_error);
}

TEST_CASE("sample_cdpp_exact marginals match enumeration") {
  Rng rng(24);
  Matrix km = oracle::random_psd(7, rng);
  PsdMatrix k(km);
  const Index c = 3;
  Vector expected = enumerate_cdpp(k, c).marginals();
  const int draws = 100000;
  Vector freq = Vector::Zero(7);
  for (int i = 0; i < draws; ++i)
    for (Index j : sample_cdpp_exact(k, c, rng)) freq(j) += 1.0;
  freq /= double(draws);
  for (Index j = 0; j < 7; ++j) {
    const double se = std::sqrt(expected(j) * (1.0 - expected(j)) / draws);
    CHECK(std::abs(freq(j) - expected(j)) <= 3.0 * se + 1e-12);
  }
  CHECK(expected.sum() == doctest::Approx(double(c)).epsilon(1e-12));
}

TEST_CASE("gibbs_swap_prob") {
  PsdMatrix id(Matrix::Identity(6, 6));
  GibbsState s(id, LandmarkSet{0, 1, 2}, Rng(1));
  for (Index v : {0, 1, 2})
    for (Index u : {3, 4, 5}) CHECK(gibbs_swap_prob(id, s, v, u) == 0.5);

  Matrix dup = Matrix::Identity(4, 4);
  dup(0, 1) = dup(1, 0) = 1.0;
  PsdMatrix kd(dup);
  GibbsState sd(kd, LandmarkSet{0, 2}, Rng(1));
  CHECK(gibbs_swap_prob(kd, sd, 2, 1) == 0.0);
  GibbsState singular(kd, LandmarkSet{0, 1}, Rng(1));
  CHECK(gibbs_swap_prob(kd, singular, 1, 3) == 1.0);

  Rng rng(25);
  Matrix km = oracle::random_psd(9, rng);
  PsdMatrix k(km);
  LandmarkSet y{1, 4, 6, 8};
  GibbsState st(k, y, Rng(2));
  for (Index v : y)
    for (Index u : {0, 2, 3, 5, 7}) {
      std::vector<Index> next(y.begin(), y.end());
      *std::find(next.begin(), next.end(), v) = u;
      const double a = logdet_submatrix(k, LandmarkSet(next));
      const double b = logdet_submatrix(k, y);
      const double ratio = std::exp(a - b);
      CHECK(std::abs(gibbs_swap_prob(k, st, v, u) - ratio / (1.0 + ratio)) <= 1e-10);
    }
  CHECK_THROWS_AS(gibbs_swap_prob(k, st, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(gibbs_swap_prob(k, st, 1, 4), std::invalid_argument);
}

TEST_CASE("gibbs_step") {
  PsdMatrix id(Matrix::Identity(8, 8));
  GibbsState s(id, LandmarkSet{0, 1, 2}, Rng(3));
  const int steps = 40000;
  int moved = 0, moved_eager = 0;
  GibbsState e(id, LandmarkSet{0, 1, 2}, Rng(4));
  for (int i = 0; i < steps; ++i) {
    LandmarkSet before = s.landmarks();
    gibbs_step(s, id);
    CHECK(s.cardinality() == 3);
    if (s.landmarks() != before) ++moved;
    LandmarkSet eb = e.landmarks();
    gibbs_step(e, id, GibbsOptions{false});
    if (e.landmarks() != eb) ++moved_eager;
  }
  CHECK(s.step() == steps);
  CHECK(std::abs(double(moved) / steps - 0.25) <= 0.01);
  CHECK(std::abs(double(moved_eager) / steps - 0.5) <= 0.01);

  Rng rng(26);
  Matrix km = oracle::random_psd(10, rng);
  PsdMatrix k(km);
  GibbsState g(k, LandmarkSet{0, 3, 5, 7}, Rng(5));
  for (int i = 1; i <= 5000; ++i) {
    gibbs_step(g, k);
    if (i % 1000 == 0) CHECK(std::abs(g.logdet() - logdet_submatrix(k, g.landmarks())) <= 1e-8);
  }
}

TEST_CASE("transition matrix detailed balance, N=8 c=3") {
  Rng rng(27);
  Matrix km = oracle::random_psd(8, rng);
  oracle::Enumerated e = oracle::cdpp(km, 3);
  Matrix p = transition_oracle(km, 3, true);
  double worst = 0.0;
  for (Index a = 0; a < p.rows(); ++a)
    for (Index b = 0; b < p.cols(); ++b)
      worst = std::max(worst, std::abs(e.probs[std::size_t(a)] * p(a, b) - e.probs[std::size_t(b)] * p(b, a)));
  CHECK(worst <= 1e-10);
}

TEST_CASE("gibbs_sample") {
  Rng rng(28);
  Matrix km = oracle::random_psd(12, rng);
  PsdMatrix k(km);
  LandmarkSet start{2, 5, 9};
  Rng a(1), b(1);
  CHECK(gibbs_sample(k, 3, 0, start, a) == start);
  CHECK(kDefaultGibbsIterations == 3000);

  Rng r1(77), r2(77);
  CHECK(gibbs_sample(k, 4, 500, UniformInit{}, r1) == gibbs_sample(k, 4, 500, UniformInit{}, r2));
  CHECK_THROWS_AS(gibbs_sample(k, 12, 10, UniformInit{}, b), std::invalid_argument);
  CHECK_THROWS_AS(gibbs_sample(k, 0, 10, UniformInit{}, b), std::invalid_argument);

  auto reps1 = run_gibbs_replicas(k, start, 200, 16, 9, {}, 1);
  auto reps4 = run_gibbs_replicas(k, start, 200, 16, 9, {}, 4);
  CHECK(reps1 == reps4);
}

TEST_CASE("gibbs replicas approach the c-DPP") {
  Rng rng(29);
  Matrix km = oracle::random_psd(7, rng);
  PsdMatrix k(km);
  oracle::Enumerated e = oracle::cdpp(km, 3);
  auto reps = run_gibbs_replicas(k, LandmarkSet{0, 1, 2}, 400, 20000, 3);
  std::map<LandmarkSet, double> freq;
  for (const auto& s : reps) freq[s] += 1.0 / 20000.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < e.subsets.size(); ++i) tv += std::abs(freq[LandmarkSet(e.subsets[i])] - e.probs[i]);
  CHECK(0.5 * tv <= 0.05);
}

TEST_CASE("kmeanspp_init") {
  Rng rng(30);
  Matrix x(6, 2);
  x << 0, 0, 1, 0, 0, 1, 5, 5, 6, 5, 5, 6;
  CHECK(kmeanspp_init(x, 6, rng).size() == 6);
  CHECK_THROWS_AS(kmeanspp_init(x, 7, rng), std::invalid_argument);

  Matrix dupx(4, 1);
  dupx << 0, 0, 0, 3;
  for (int i = 0; i < 200; ++i) {
    LandmarkSet s = kmeanspp_init(dupx, 2, rng);
    const bool has_far = s.contains(3);
    CHECK(has_far);
  }

  Matrix clusters(100, 2);
  for (Index i = 0; i < 100; ++i) {
    const double cx = i < 50 ? 0.0 : 10.0;
    clusters(i, 0) = cx + 0.1 * rng.normal();
    clusters(i, 1) = 0.1 * rng.normal();
  }
  int split_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    LandmarkSet s = kmeanspp_init(clusters, 2, rng);
    if ((s[0] < 50) != (s[1] < 50)) ++split_ok;
  }
  CHECK(split_ok >= 950);
}
