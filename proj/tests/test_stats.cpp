// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "rwfbm/error.hpp"
#include "rwfbm/stats.hpp"

using namespace rwfbm;

TEST(LinearFit, RecoversExactLine) {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x)
    y.push_back(-0.25 * v + 3);
  const auto f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, -0.25, 1e-15);
  EXPECT_NEAR(f.intercept, 3, 1e-14);
  EXPECT_NEAR(f.r_squared, 1, 1e-15);
}

TEST(LinearFit, NoisyLine) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0, 0.01);
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(i * 0.05);
    y.push_back(1.5 * x.back() - 2 + noise(gen));
  }
  const auto f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 1.5, 0.005);
  EXPECT_GT(f.r_squared, 0.999);
}

TEST(LinearFit, Degenerate) {
  EXPECT_THROW(linear_fit({1}, {2}), InsufficientDataError);
  EXPECT_THROW(linear_fit({1, 1, 1}, {1, 2, 3}), InsufficientDataError);
  EXPECT_THROW(linear_fit({1, 2}, {1}), InsufficientDataError);
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  EXPECT_DOUBLE_EQ(quantile(v, 0), 1);
  EXPECT_DOUBLE_EQ(quantile(v, 1), 9);
  EXPECT_DOUBLE_EQ(median(v), 3.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.9), 6.9);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.3), 7);
  EXPECT_THROW(quantile({}, 0.5), InsufficientDataError);
  EXPECT_THROW(quantile(v, 1.5), DomainError);
}

TEST(Kolmogorov, KnownValues) {
  EXPECT_NEAR(kolmogorov_sf(1.36), 0.0494859, 1e-6);
  EXPECT_NEAR(kolmogorov_sf(1.63), 0.00984636, 1e-7);
  EXPECT_NEAR(kolmogorov_sf(0.5), 0.963945, 1e-6);
  EXPECT_EQ(kolmogorov_sf(0), 1);
  EXPECT_LT(kolmogorov_sf(5), 1e-15);
}

TEST(Kolmogorov, SmoothAcrossBranches) {
  EXPECT_NEAR(kolmogorov_sf(1.18 - 1e-9), kolmogorov_sf(1.18), 1e-8);
  double prev = 1;
  for (double x = 0.1; x < 3; x += 0.01) {
    const double p = kolmogorov_sf(x);
    EXPECT_LE(p, prev + 1e-12);
    prev = p;
  }
}

// Under the null, p-values are roughly uniform: rejection at 0.05 happens
// about 5% of the time.
TEST(KsTest, NominalLevelUnderNull) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> z(0, 2);
  int rejections = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(300);
    for (auto& v : s)
      v = z(gen);
    rejections += ks_test_normal(s, 4.0).p_value < 0.05;
  }
  EXPECT_LT(rejections, 0.05 * trials + 3 * std::sqrt(0.05 * 0.95 * trials));
  EXPECT_GT(rejections, 0);
}

TEST(KsTest, DetectsWrongVariance) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z(0, 1.3);
  std::vector<double> s(2000);
  for (auto& v : s)
    v = z(gen);
  EXPECT_LT(ks_test_normal(s, 1.0).p_value, 1e-4);
  EXPECT_THROW(ks_test_normal(s, 0.0), DomainError);
  EXPECT_THROW(ks_test_normal({}, 1.0), InsufficientDataError);
}

TEST(SampleCovariance, StandardErrorMatchesSpread) {
  // Independent N(0,1) pairs with correlation 0.6: Var(XY) = 1 + rho^2.
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  const double rho = 0.6;
  const int n = 20000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = z(gen);
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * z(gen);
  }
  const auto e = sample_covariance(x, y);
  EXPECT_NEAR(e.value, rho, 4 * e.standard_error);
  EXPECT_NEAR(e.standard_error, std::sqrt((1 + rho * rho) / n), 0.05 * std::sqrt((1 + rho * rho) / n));
}

TEST(ReplicaSeed, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i)
    seen.insert(replica_seed(42, i));
  EXPECT_EQ(seen.size(), 10000U);
  EXPECT_EQ(replica_seed(42, 7), replica_seed(42, 7));
  EXPECT_NE(replica_seed(42, 7), replica_seed(43, 7));
}

TEST(RunReplicas, ThreadCountInvariant) {
  auto fn = [](std::uint64_t i, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    return std::vector<double>{static_cast<double>(i), std::normal_distribution<double>()(gen)};
  };
  const auto a = run_replicas(257, 9, fn, 1);
  const auto b = run_replicas(257, 9, fn, 4);
  ASSERT_EQ(a.size(), 257U);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i][0], static_cast<double>(i));
}

TEST(RunReplicas, PropagatesExceptions) {
  auto fn = [](std::uint64_t i, std::uint64_t) -> std::vector<double> {
    if (i == 13)
      throw DomainError("replica 13");
    return {};
  };
  EXPECT_THROW(run_replicas(50, 1, fn, 3), DomainError);
  EXPECT_THROW(run_replicas(50, 1, fn, 1), DomainError);
  EXPECT_TRUE(run_replicas(0, 1, fn, 2).empty());
}
