#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <Eigen/Dense>

#include "dppnys/data.hpp"
#include "dppnys/rng.hpp"

using namespace dppnys;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("load_dataset parses a small csv by target name") {
  auto path = write_temp("dppnys_small.csv", "a,b,y\n1,2,5\n0,1,3\n2,2,7\n");
  Dataset ds = load_dataset(path, std::string("y"));
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.targets(0) == 5.0);
  CHECK(ds.targets(1) == 3.0);
  CHECK(ds.targets(2) == 7.0);
  CHECK(ds.features(2, 0) == 2.0);
  CHECK(ds.features(1, 1) == 1.0);

  Dataset by_index = load_dataset(path, Index{0});
  CHECK(by_index.targets(0) == 1.0);
  CHECK(by_index.features(0, 1) == 5.0);
  Dataset last = load_dataset(path, Index{-1});
  CHECK(last.targets(2) == 7.0);
}

TEST_CASE("load_dataset rejects bad input") {
  CHECK_THROWS_WITH_AS(load_dataset(write_temp("dppnys_empty.csv", ""), Index{-1}), "no rows",
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(load_dataset(write_temp("dppnys_nan.csv", "a,y\n1,2\nNaN,3\n"), Index{-1}),
                       doctest::Contains("non-finite value at ("), std::runtime_error);
  CHECK_THROWS_AS(load_dataset(write_temp("dppnys_text.csv", "a,y\n1,2\nx,3\n"), Index{-1}),
                  std::runtime_error);
  CHECK_THROWS_AS(load_dataset(write_temp("dppnys_one.csv", "a,y\n1,2\n"), Index{-1}),
                  std::runtime_error);
  CHECK_THROWS_AS(load_dataset("/nonexistent/dppnys.csv", Index{-1}), std::runtime_error);
}

TEST_CASE("standardize") {
  Dataset ds;
  ds.features.resize(2, 2);
  ds.features << 1, 5, 3, 5;
  ds.targets = Vector::Zero(2);
  Dataset s = standardize(ds);
  CHECK(s.features(0, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
  CHECK(s.features(1, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(s.features(0, 1) == 0.0);
  CHECK(s.features(1, 1) == 0.0);

  Rng rng(3);
  Dataset r;
  r.features.resize(20, 3);
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 3; ++j) r.features(i, j) = 4.0 * rng.normal() + 2.0;
  r.targets = Vector::Zero(20);
  Dataset once = standardize(r);
  Dataset twice = standardize(once);
  CHECK((once.features - twice.features).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index j = 0; j < 3; ++j) {
    const Vector col = once.features.col(j);
    CHECK(std::abs(col.mean()) <= 1e-12);
    const double var = (col.array() - col.mean()).square().sum() / 19.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("split sizes, determinism, partition") {
  auto [tr, te] = split_indices(4000, 0.75, 1);
  CHECK(tr.size() == 3000);
  CHECK(te.size() == 1000);
  std::set<Index> all(tr.begin(), tr.end());
  all.insert(te.begin(), te.end());
  CHECK(all.size() == 4000);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 3999);

  CHECK(split_indices(10, 0.5, 7) == split_indices(10, 0.5, 7));
  auto [a, b] = split_indices(2, 0.5, 0);
  CHECK(a.size() == 1);
  CHECK(b.size() == 1);
  CHECK_THROWS_AS(split_indices(10, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(split_indices(10, 0.0, 0), std::invalid_argument);
}

TEST_CASE("rbf_kernel entries") {
  Matrix x(2, 2);
  x << 0, 0, 1, 1;
  const double sigma = 1.0;
  Matrix k = rbf_kernel(x, x, sigma);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));  // distance sqrt(2) sigma
  CHECK(std::abs(std::exp(-1.0) - 0.367879) < 1e-6);
  CHECK_THROWS_AS(rbf_kernel(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rbf_kernel(x, Matrix(1, 3), 1.0), std::invalid_argument);

  Rng rng(5);
  Matrix x5(5, 3);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 3; ++j) x5(i, j) = rng.normal();
  Matrix k5 = rbf_kernel(x5, 0.7);
  CHECK((k5 - k5.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(k5.diagonal().isOnes(0.0));
  CHECK(k5.minCoeff() >= 0.0);
  CHECK(k5.maxCoeff() <= 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(k5);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * 5);
  CHECK((rbf_kernel(x5, x5, 0.7) - k5).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("synthetic_regression") {
  Dataset clean = synthetic_regression(50, 3, 0.0, 4);
  REQUIRE(clean.noiseless_targets);
  CHECK((clean.targets - *clean.noiseless_targets).cwiseAbs().maxCoeff() == 0.0);

  Dataset a = synthetic_regression(100, 4, 0.1, 9);
  Dataset b = synthetic_regression(100, 4, 0.1, 9);
  CHECK(a.features == b.features);
  CHECK(a.targets == b.targets);

  Dataset big = synthetic_regression(2000, 5, 0.1, 2);
  const Vector e = big.targets - *big.noiseless_targets;
  const double mean = e.mean();
  const double var = (e.array() - mean).square().sum() / double(e.size() - 1);
  CHECK(var >= 0.008);
  CHECK(var <= 0.012);
  CHECK(std::abs(mean) <= 3.0 * 0.1 / std::sqrt(2000.0));
  CHECK(big.features.allFinite());
}

TEST_CASE("KernelConfig validation") {
  KernelConfig ok{1.0, 0.0};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((KernelConfig{0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((KernelConfig{1.0, -1.0}.validate()), std::invalid_argument);
}
