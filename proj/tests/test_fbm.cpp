// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rwfbm/error.hpp"
#include "rwfbm/fbm.hpp"
#include "rwfbm/oracle.hpp"

using namespace rwfbm;

namespace {

TruncationPolicy window(double past) {
  TruncationPolicy p;
  p.max_past_horizon = past;
  return p;
}

} // namespace

TEST(Kernel, Validation) {
  EXPECT_THROW(Kernel(0.0), DomainError);
  EXPECT_THROW(Kernel(1.0), DomainError);
  EXPECT_THROW(Kernel(-0.2), DomainError);
  EXPECT_FALSE(Kernel(0.2).convergence_proven());
  EXPECT_TRUE(Kernel(0.3).convergence_proven());
}

TEST(Kernel, HalfIsIndicator) {
  Kernel k(0.5);
  EXPECT_DOUBLE_EQ(kernel_h(0.0, 1.0, k), 1.0);
  EXPECT_DOUBLE_EQ(kernel_h(0.3, 2.0, k), 1.0);
  EXPECT_DOUBLE_EQ(kernel_h(-0.5, 1.0, k), 0.0);
  EXPECT_DOUBLE_EQ(kernel_h(1.0, 1.0, k), 0.0);
}

TEST(Kernel, DiagonalIsZero) {
  for (double H : {0.1, 0.3, 0.5, 0.75, 0.95})
    for (double t : {0.0, 0.5, 3.0})
      EXPECT_EQ(kernel_h(t, t, Kernel(H)), 0.0);
}

TEST(Kernel, GammaNormalization) {
  // Exponent 1/2 with Gamma(3/2) = sqrt(pi)/2, evaluated through H close to 1.
  const double H = 1.0 - 1e-15;
  const double expect = 2.0 / (std::sqrt(M_PI) / 2);
  EXPECT_NEAR(kernel_h(0.0, 4.0, Kernel(H)), expect, 1e-12);
  EXPECT_NEAR(expect, 2.256758, 1e-6);
}

TEST(Kernel, DomainError) { EXPECT_THROW(kernel_h(2.0, 1.0, Kernel(0.7)), DomainError); }

TEST(Weights, HalfDegenerates) {
  Kernel k(0.5);
  for (unsigned m : {0u, 3u, 6u}) {
    auto w = moving_average_weights(5, m, k, TruncationPolicy{});
    EXPECT_EQ(w.tail_cutoff, 0u);
    for (std::int64_t r = 0; r < 5; ++r)
      EXPECT_DOUBLE_EQ(w[r], std::ldexp(1.0, -static_cast<int>(m)));
  }
  auto w = moving_average_weights(5, 2, k, std::uint64_t{7});
  for (std::int64_t r = -7; r < 0; ++r)
    EXPECT_EQ(w[r], 0.0);
}

TEST(Weights, ThreeQuartersUnitGrid) {
  auto w = moving_average_weights(1, 0, Kernel(0.75), std::uint64_t{3});
  EXPECT_NEAR(w[0], 1.0 / std::tgamma(1.25), 1e-14);
  EXPECT_NEAR(w[0], 1.103262, 1e-6);
}

TEST(Weights, CutoffMonotoneInEpsilon) {
  for (double H : {0.3, 0.4, 0.6, 0.75, 0.9}) {
    Kernel k(H);
    for (std::uint64_t idx : {1ULL, 16ULL, 1000ULL}) {
      TruncationPolicy p;
      p.epsilon = 0.2;
      std::uint64_t prev = tail_cutoff(idx, 3, k, p);
      for (int i = 0; i < 30; ++i) {
        p.epsilon /= 2;
        const std::uint64_t V = tail_cutoff(idx, 3, k, p);
        EXPECT_GE(V, prev);
        prev = V;
      }
    }
  }
}

// The cutoff's tail bound really is below epsilon^2 times the variance.
TEST(Weights, CutoffMeetsTarget) {
  for (double H : {0.3, 0.4, 0.6, 0.75}) {
    Kernel k(H);
    for (double eps : {0.3, 0.1, 0.03}) {
      TruncationPolicy p;
      p.epsilon = eps;
      const std::uint64_t idx = 64;
      const std::uint64_t V = tail_cutoff(idx, 3, k, p);
      const double tail = tail_second_moment(idx, 3, k, V);
      const double full = exact_second_moment(idx, 3, k, std::numeric_limits<std::uint64_t>::max());
      EXPECT_LE(tail, eps * eps * full) << "H=" << H << " eps=" << eps;
    }
  }
}

TEST(Weights, PastHorizonCaps) {
  TruncationPolicy p;
  p.max_past_horizon = 2.0;
  EXPECT_EQ(tail_cutoff(16, 2, Kernel(0.75), p), 32u);
  p.max_past_horizon = 0;
  EXPECT_EQ(tail_cutoff(16, 2, Kernel(0.75), p), 0u);
  p.epsilon = 0;
  EXPECT_THROW(tail_cutoff(16, 2, Kernel(0.75), p), ConfigError);
}

TEST(SecondMoment, HalfIsTime) {
  for (unsigned m : {0u, 2u, 5u, 8u})
    EXPECT_EQ(exact_second_moment(std::uint64_t{1} << (2 * m), m, Kernel(0.5), TruncationPolicy{}), 1.0);
  EXPECT_EQ(exact_second_moment(0, 3, Kernel(0.7), TruncationPolicy{}), 0.0);
}

TEST(SecondMoment, MatchesBruteForceSquares) {
  const Kernel k(0.75);
  const unsigned m = 4;
  const std::uint64_t idx = 256;
  TruncationPolicy p;
  p.epsilon = 0.05;
  const std::uint64_t V = tail_cutoff(idx, m, k, p);
  ASSERT_GT(V, 8 * idx);
  ASSERT_LT(V, 50000000u);
  const double c = std::pow(2.0, -2 * 0.75 * m) / std::tgamma(1.25);
  double s = 0;
  for (std::int64_t r = -static_cast<std::int64_t>(V); r < static_cast<std::int64_t>(idx); ++r) {
    const double w = c * (std::pow(static_cast<double>(idx - r), 0.25) - (r < 0 ? std::pow(static_cast<double>(-r), 0.25) : 0.0));
    s += w * w;
  }
  EXPECT_NEAR(exact_second_moment(idx, m, k, p), s, 1e-12 * s);
}

TEST(SecondMoment, EulerMaclaurinTailMatchesDirect) {
  for (double H : {0.2, 0.4, 0.6, 0.9}) {
    const Kernel k(H);
    const std::uint64_t idx = 40;
    const std::uint64_t V = 300000;
    const double c = level_scale(2, k);
    double s = 0;
    for (std::uint64_t r = 0; r < idx; ++r)
      s += std::pow(c * k.power(static_cast<double>(idx - r)), 2);
    for (std::uint64_t v = 1; v <= V; ++v)
      s += std::pow(c * past_difference(idx, v, k), 2);
    EXPECT_NEAR(exact_second_moment(idx, 2, k, V), s, 1e-13 * s) << H;
    EXPECT_NEAR(exact_second_moment(idx, 2, k, V) + tail_second_moment(idx, 2, k, V),
                exact_second_moment(idx, 2, k, std::numeric_limits<std::uint64_t>::max()), 1e-13 * s);
  }
}

TEST(SecondMoment, ConvergesToVarianceConstant) {
  for (double H : {0.3, 0.75}) {
    const double vh = variance_constant(H).value;
    const unsigned m = 6;
    const double v = exact_second_moment(std::uint64_t{1} << (2 * m), m, Kernel(H), TruncationPolicy{});
    EXPECT_NEAR(v, vh, 0.02 * vh);
  }
}

TEST(GridValues, ZeroIndexIsZero) {
  TwoSidedBm bm(3);
  auto path = simulate_fbm(bm, 3, Kernel(0.7), 1.0, window(2.0));
  EXPECT_EQ(path.values[0], 0.0);
  EXPECT_EQ(path.values.size(), 65u);
  EXPECT_EQ(path.tail_cutoff_used, 128u);
}

TEST(GridValues, HalfReproducesWalk) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (unsigned m : {0u, 3u, 6u}) {
      TwoSidedBm bm(seed);
      for (GridMethod method : {GridMethod::direct, GridMethod::fft}) {
        auto path = simulate_fbm(bm, m, Kernel(0.5), 2.0, TruncationPolicy{}, method);
        for (std::uint64_t k = 0; k < path.values.size(); ++k)
          ASSERT_NEAR(path.values[k], bm.grid_value(m, static_cast<std::int64_t>(k)), 1e-12);
      }
    }
  }
}

TEST(GridValues, FftMatchesDirect) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> hu(0.05, 0.95);
  for (int trial = 0; trial < 10; ++trial) {
    const double H = hu(gen);
    TwoSidedBm bm(gen());
    const unsigned m = 3;
    auto a = simulate_fbm(bm, m, Kernel(H), 1.5, window(3.0), GridMethod::direct);
    auto b = simulate_fbm(bm, m, Kernel(H), 1.5, window(3.0), GridMethod::fft);
    for (std::size_t k = 0; k < a.values.size(); ++k)
      ASSERT_NEAR(a.values[k], b.values[k], 1e-12) << "H=" << H << " k=" << k;
  }
}

TEST(GridValues, MatchesBruteForceAtSmallLevel) {
  TwoSidedBm bm(2024);
  const Kernel k(0.75);
  TruncationPolicy p = window(4.0);
  auto path = simulate_fbm(bm, 2, k, 1.0, p, GridMethod::fft);
  EXPECT_NEAR(path.values[4], brute_force_recompute(bm, 2, k, 4, path.tail_cutoff_used), 1e-12);
}

TEST(GridValues, SingleValueAgrees) {
  TwoSidedBm bm(77);
  const Kernel k(0.35);
  auto path = simulate_fbm(bm, 4, k, 1.0, window(2.0), GridMethod::fft);
  for (std::uint64_t idx : {1ULL, 17ULL, 100ULL, 256ULL}) {
    auto w = moving_average_weights(idx, 4, k, path.tail_cutoff_used);
    EXPECT_NEAR(fbm_value(bm, 4, w), path.values[idx], 1e-12);
  }
}

TEST(GridValues, SummationByPartsAgrees) {
  std::mt19937_64 gen(9);
  for (double H : {0.3, 0.45, 0.7, 0.9}) {
    TwoSidedBm bm(gen());
    const Kernel k(H);
    const unsigned m = 3;
    auto path = simulate_fbm(bm, m, k, 1.0, window(2.0), GridMethod::direct);
    for (std::uint64_t idx = 1; idx < path.values.size(); idx += 7) {
      const double by_parts = fbm_value_by_parts(bm, m, k, idx, path.tail_cutoff_used);
      EXPECT_NEAR(by_parts, path.values[idx], 1e3 * std::numeric_limits<double>::epsilon() *
                                                  std::max(1.0, std::abs(path.values[idx])));
    }
  }
}

TEST(GridValues, MissingStepsThrow) {
  TwoSidedBm bm(1);
  bm.right().ensure(3, 1.0);
  EXPECT_THROW(fbm_grid_values(bm, 3, Kernel(0.7), 1.0, window(1.0)), OutOfHorizonError);
}

TEST(GridValues, UnboundedWindowRejected) {
  TwoSidedBm bm(1);
  EXPECT_THROW(simulate_fbm(bm, 4, Kernel(0.75), 1.0, TruncationPolicy{}), ResourceLimitError);
}

TEST(Eval, Interpolates) {
  TwoSidedBm bm(12);
  auto path = simulate_fbm(bm, 3, Kernel(0.75), 1.0, window(1.0));
  EXPECT_EQ(fbm_eval(path, 5.0 / 64), path.values[5]);
  EXPECT_DOUBLE_EQ(fbm_eval(path, 5.5 / 64), 0.5 * (path.values[5] + path.values[6]));
  EXPECT_EQ(fbm_eval(path, 1.0), path.values[64]);
  EXPECT_THROW(fbm_eval(path, -0.01), DomainError);
  EXPECT_THROW(fbm_eval(path, 1.01), DomainError);
}

TEST(Eval, GammaMix) {
  const unsigned m = 3;
  TwoSidedBm bm(31);
  auto path = simulate_fbm(bm, m, Kernel(0.75), 1.0, window(1.0), GridMethod::direct);
  const double dt = 1.0 / 64;
  for (double t : {0.3, 0.01, 0.999}) {
    const auto k = static_cast<std::size_t>(std::floor(t / dt));
    const double gamma = t / dt - static_cast<double>(k);
    EXPECT_NEAR(fbm_eval(path, t), gamma * path.values[k + 1] + (1 - gamma) * path.values[k], 1e-15);
  }
}

TEST(Eval, HalfMatchesInterpolatedWalk) {
  const unsigned m = 4;
  TwoSidedBm bm(8);
  auto path = simulate_fbm(bm, m, Kernel(0.5), 1.0, TruncationPolicy{});
  for (double t : {0.0, 0.123, 0.5, 0.77, 1.0})
    EXPECT_NEAR(fbm_eval(path, t), bm.evaluate(m, t), 1e-12);
}

TEST(Tail, LargeDeviationFrequency) {
  const Kernel k(0.75);
  const unsigned m = 2;
  const std::uint64_t idx = 16;
  const std::uint64_t V = 64;
  const auto w = moving_average_weights(idx, m, k, V);
  const double sd = std::sqrt(exact_second_moment(idx, m, k, V));
  const int R = 10000;
  int over[4] = {0, 0, 0, 0};
  for (int r = 0; r < R; ++r) {
    TwoSidedBm bm(static_cast<std::uint64_t>(r) + 1000);
    bm.extend(m, 1.0, 4.0);
    const double x = std::abs(fbm_value(bm, m, w)) / sd;
    for (int j = 1; j <= 3; ++j)
      over[j] += x >= j;
  }
  for (int j = 1; j <= 3; ++j)
    EXPECT_LE(static_cast<double>(over[j]) / R, 2 * std::exp(-j * j / 2.0) + 0.01) << j;
}

TEST(GridValues, EveryFourthMatchesFullGrid) {
  std::mt19937_64 gen(17);
  for (double H : {0.3, 0.5, 0.75}) {
    for (double past : {0.0, 1.0, 1.31}) {
      TwoSidedBm bm(gen());
      const unsigned m = 4;
      auto full = simulate_fbm(bm, m, Kernel(H), 1.7, window(past), GridMethod::direct);
      auto every4 = fbm_grid_values_every4(bm, m, Kernel(H), 1.7, window(past));
      ASSERT_EQ(every4.size(), (full.values.size() - 1) / 4 + 1);
      for (std::size_t k = 0; k < every4.size(); ++k)
        ASSERT_NEAR(every4[k], full.values[4 * k], 1e-12) << H << " " << past << " " << k;
    }
  }
  TwoSidedBm bm(1);
  EXPECT_THROW(fbm_grid_values_every4(bm, 0, Kernel(0.7), 1.0, window(1.0)), DomainError);
}
