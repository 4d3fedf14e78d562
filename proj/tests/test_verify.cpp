// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "rwfbm/error.hpp"
#include "rwfbm/fbm.hpp"
#include "rwfbm/oracle.hpp"
#include "rwfbm/testing.hpp"
#include "rwfbm/verify.hpp"

using namespace rwfbm;

namespace {

const VerificationReport& find(const std::vector<VerificationReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.check == name)
      return r;
  throw std::runtime_error("no report " + name);
}

double detail(const VerificationReport& r, const std::string& key) {
  for (const auto& [k, v] : r.details)
    if (k == key)
      return std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int64_t>(v));
  throw std::runtime_error("no detail " + key);
}

} // namespace

// ------------------------------------------------------------------ bounds

TEST(RateBound, ThreeQuarters) {
  const RateBound b = level_difference_bound(0.75, 1.0);
  EXPECT_NEAR(b.alpha, 83.5 / std::tgamma(1.25), 1e-12);
  EXPECT_NEAR(b.alpha, 92.122, 1e-3);
  EXPECT_EQ(b.beta, 0.5);
  EXPECT_DOUBLE_EQ(b.exception_budget(1, 8, 3), 8 * std::exp2(-32));
  EXPECT_NEAR(b.threshold(8), b.alpha * 8 / 16, 1e-12);
  const RateBound c = b.compounded();
  EXPECT_NEAR(c.alpha, b.alpha / std::pow(1 - M_SQRT1_2, 2), 1e-9);
  EXPECT_DOUBLE_EQ(c.exception_budget(1, 8, 3), 9 * std::exp2(-32));
}

TEST(RateBound, ThreeEighths) {
  const RateBound b = level_difference_bound(0.375, 1.0);
  const double inner = 0.125 / std::sqrt(0.625) + 8 + 36 * 0.125;
  EXPECT_NEAR(b.alpha, inner / std::tgamma(0.875), 1e-12);
  EXPECT_EQ(b.beta, 0.25);
}

TEST(RateBound, Domain) {
  EXPECT_THROW(level_difference_bound(0.5, 1), DomainError);
  EXPECT_THROW(level_difference_bound(0.2, 1), DomainError);
  EXPECT_THROW(level_difference_bound(0.75, 0), DomainError);
  EXPECT_NEAR(beta_exponent(0.3), 0.1, 1e-15);
  EXPECT_EQ(beta_exponent(0.9), 0.5);
}

TEST(RateBound, BudgetsShrinkWithLevel) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> Ku(0.1, 10), Cu(1.01, 5);
  for (int i = 0; i < 50; ++i) {
    const double K = Ku(gen), C = Cu(gen);
    for (unsigned m = 1; m < 20; ++m)
      EXPECT_LT(power_budget(2, K, m + 1, C), power_budget(2, K, m, C));
  }
}

TEST(Thresholds, Values) {
  EXPECT_DOUBLE_EQ(time_lag_threshold(1, 3, 8), 6.0 / 256);
  EXPECT_DOUBLE_EQ(bm_difference_threshold(1, 8), 0.5);
  EXPECT_DOUBLE_EQ(log_star(2), 1);
  EXPECT_DOUBLE_EQ(log_star(std::exp(3)), 3);
}

// ------------------------------------------------------------------ identities

TEST(Identities, SketchLags) {
  Hierarchy h(fixtures::sketch_source(), Side::right);
  h.ensure(1, 3.0);
  const auto lags = time_lags(h, 1);
  ASSERT_GE(lags.size(), 3U);
  EXPECT_EQ(lags[0], 1.0);
  EXPECT_EQ(lags[1], 0.5);
  EXPECT_EQ(lags[2], 1.0);
  const auto r = check_exact_identities(h, 1, 3.0);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.hard_failure);
  EXPECT_EQ(detail(r, "right_max_lag_level_1"), 1.0);
}

TEST(Identities, RandomSeedsPass) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TwoSidedBm bm(seed);
    const auto r = check_exact_identities(bm, 6, 1.0);
    EXPECT_TRUE(r.pass) << seed;
    EXPECT_EQ(r.statistic, 0);
    // At least 4^5 + 4^4 + ... bridges per side.
    EXPECT_GE(detail(r, "right_checked"), 1365);
    EXPECT_GE(detail(r, "left_checked"), 1365);
    EXPECT_LT(detail(r, "right_max_lag_level_6"), 0.1);
  }
}

TEST(Identities, CorruptedStepIsHardFailure) {
  TwoSidedBm bm(11);
  bm.right().ensure(4, 1.0);
  corrupt_twisted_step(bm.right(), 3, 10);
  const auto r = check_exact_identities(bm, 4, 1.0);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.hard_failure);
  EXPECT_TRUE(any_hard_failure({r}));
}

TEST(Identities, NeedStoppingTimes) {
  HierarchyOptions o;
  o.keep_stopping_times = false;
  Hierarchy h(std::make_shared<SeededRawSteps>(3), Side::right, o);
  EXPECT_THROW(check_exact_identities(h, 3, 1.0), Error);
}

// ------------------------------------------------------------------ exceedance

TEST(Bounds, Validation) {
  BoundsConfig c;
  c.C = 1;
  try {
    check_probabilistic_bounds(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "C");
  }
  c.C = 3;
  c.replicas = 99;
  try {
    check_probabilistic_bounds(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "replicas");
  }
}

TEST(Bounds, SmallLevelPasses) {
  BoundsConfig c;
  c.level = 5;
  c.replicas = 100;
  c.threads = 2;
  const auto rs = check_probabilistic_bounds(c);
  ASSERT_EQ(rs.size(), 5U);
  for (const auto& r : rs) {
    EXPECT_TRUE(r.pass) << r.check;
    EXPECT_FALSE(r.hard_failure);
    EXPECT_EQ(r.replicas, 100U);
    EXPECT_NEAR(r.bound, detail(r, "budget") + 0.2, 1e-15);
  }
  EXPECT_DOUBLE_EQ(detail(find(rs, "time_lag"), "threshold"), time_lag_threshold(1, 3, 5));
}

TEST(Bounds, HalfSkipsFbmChecks) {
  BoundsConfig c;
  c.hurst = 0.5;
  c.level = 4;
  c.replicas = 100;
  EXPECT_EQ(check_probabilistic_bounds(c).size(), 3U);
}

TEST(Bounds, EmptyWindowIsTrivial) {
  BoundsConfig c;
  c.level = 3;
  c.horizon = 1e-3;
  c.replicas = 100;
  for (const auto& r : check_probabilistic_bounds(c)) {
    EXPECT_TRUE(r.pass) << r.check;
    EXPECT_EQ(r.statistic, 0) << r.check;
    EXPECT_FALSE(r.notes.empty());
  }
}

TEST(Bounds, Reproducible) {
  BoundsConfig c;
  c.level = 4;
  c.replicas = 100;
  c.threads = 1;
  const auto a = check_probabilistic_bounds(c);
  c.threads = 3;
  const auto b = check_probabilistic_bounds(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(to_ndjson(a[i]), to_ndjson(b[i]));
}

// ------------------------------------------------------------------ rates

TEST(Rate, NeedsFourLevels) {
  RateConfig c;
  c.m_min = 6;
  c.m_max = 8;
  EXPECT_THROW(fit_convergence_rate(c), InsufficientDataError);
}

TEST(Rate, SmallRun) {
  RateConfig c;
  c.m_min = 3;
  c.m_max = 6;
  c.replicas = 20;
  const auto med = median_level_differences(c);
  ASSERT_EQ(med.size(), 4U);
  EXPECT_LT(med.back(), med.front());
  const auto r = fit_convergence_rate(c);
  EXPECT_EQ(detail(r, "target_slope"), -0.5);
  EXPECT_LT(r.statistic, 0);
  EXPECT_EQ(detail(r, "median_level_6"), med.back());
}

// ------------------------------------------------------------------ distribution

TEST(Distribution, DeterministicLegsAndCovariance) {
  DistributionConfig c;
  c.level = 6;
  c.replicas = 300;
  c.past_horizon = 4;
  const auto rs = check_distributional_properties(c);
  EXPECT_TRUE(find(rs, "stationary_increments").pass);
  EXPECT_TRUE(find(rs, "self_similarity").pass);
  int covariances = 0;
  for (const auto& r : rs)
    if (r.check == "covariance") {
      ++covariances;
      EXPECT_GT(detail(r, "standard_error"), 0);
      EXPECT_NEAR(detail(r, "windowed_exact"), detail(r, "oracle"), 0.1 * detail(r, "oracle"));
    }
  EXPECT_EQ(covariances, 3);
}

TEST(Distribution, HalfIsExactBrownian) {
  DistributionConfig c;
  c.hurst = 0.5;
  c.level = 5;
  c.replicas = 500;
  const auto rs = check_distributional_properties(c);
  const auto& n = find(rs, "normality");
  EXPECT_DOUBLE_EQ(detail(n, "variance"), 1.0);
  EXPECT_TRUE(n.pass);
}

TEST(Distribution, NeedsUnitHorizon) {
  DistributionConfig c;
  c.horizon = 0.5;
  EXPECT_THROW(check_distributional_properties(c), ConfigError);
}

// ------------------------------------------------------------------ delta truncation

TEST(DeltaTruncation, TermsMatchDirectSums) {
  for (double H : {0.3, 0.75, 0.9})
    for (double delta : {0.125, 0.25, 0.5, 1.0}) {
      TwoSidedBm bm(21);
      const unsigned m = 3;
      bm.extend(m, 1.0, 1 / delta + 1);
      const Kernel kernel(H);
      const double a = delta_truncation_terms(bm, m, kernel, 1.0, delta).total();
      const double b = delta_truncation_direct(bm, m, kernel, 1.0, delta);
      EXPECT_NEAR(a, b, 1e-12) << H << " " << delta;
    }
}

TEST(DeltaTruncation, HalfIsIncrement) {
  TwoSidedBm bm(8);
  const unsigned m = 4;
  bm.extend(m, 1.0, 11);
  const Kernel kernel(0.5);
  const auto terms = delta_truncation_terms(bm, m, kernel, 1.0, 0.1);
  // delta_(m) = 25/256, so t - delta + dt = 232/256.
  EXPECT_NEAR(terms.total(), bm.grid_value(m, 256) - bm.grid_value(m, 232), 1e-14);
  EXPECT_EQ(terms.F, 0);
  EXPECT_EQ(terms.G, 0);
}

TEST(DeltaTruncation, Domain) {
  TwoSidedBm bm(1);
  bm.extend(3, 1.0, 2);
  const Kernel kernel(0.75);
  EXPECT_THROW(delta_truncation_terms(bm, 3, kernel, 1.0, 0.0), DomainError);
  EXPECT_THROW(delta_truncation_terms(bm, 3, kernel, 1.0, 1.5), DomainError);
  EXPECT_THROW(delta_truncation_terms(bm, 3, kernel, 1.0, 0.001), DomainError);
  DeltaTruncationConfig c;
  c.delta = 2;
  EXPECT_THROW(check_delta_truncation(c), DomainError);
}

TEST(DeltaTruncation, Budget) {
  const auto v = delta_truncation_variance_bounds(0.75, 1, 0.01);
  EXPECT_NEAR(v.E, std::pow(0.01, 1.5) / 1.5, 1e-15);
  EXPECT_NEAR(v.F, 3.5 * 0.01 + 2 * std::pow(0.01, 1.5), 1e-15);
  EXPECT_NEAR(v.G, 1.5 * 0.0625 / 0.25 * std::pow(0.01, 0.5), 1e-15);
  const double expect = std::sqrt(4 * std::log(100.0)) * std::sqrt(v.E + v.F + v.G) / std::tgamma(1.25);
  EXPECT_NEAR(delta_truncation_budget(0.75, 1, 0.01, 2), expect, 1e-14);
}

TEST(DeltaTruncation, SmallRunPasses) {
  DeltaTruncationConfig c;
  c.level = 6;
  c.delta = 0.05;
  c.replicas = 40;
  const auto r = check_delta_truncation(c);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(detail(r, "rms_E"), 3 * detail(r, "sd_bound_E"));
  EXPECT_LT(detail(r, "rms_F"), 3 * detail(r, "sd_bound_F"));
  EXPECT_LT(detail(r, "rms_G"), 3 * detail(r, "sd_bound_G"));
}

// ------------------------------------------------------------------ Hurst estimate

TEST(HurstEstimate, OraclePaths) {
  std::vector<double> grid(4096);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = static_cast<double>(i + 1) / 4096;
  for (double H : {0.5, 0.75}) {
    ReferenceSampler s(grid, H);
    double sum = 0;
    for (std::uint64_t p = 0; p < 50; ++p) {
      auto x = s.sample(p + 100);
      x.insert(x.begin(), 0.0);
      sum += estimate_hurst(x).hurst;
    }
    EXPECT_NEAR(sum / 50, H, 0.05);
  }
}

TEST(HurstEstimate, Degenerate) {
  const auto e = estimate_hurst(std::vector<double>(2048, 3.0));
  EXPECT_TRUE(e.degenerate);
  EXPECT_TRUE(std::isnan(e.hurst));
  EXPECT_THROW(estimate_hurst(std::vector<double>(1023, 0.0)), InsufficientDataError);
}

TEST(HurstEstimate, LinearPathIsOne) {
  std::vector<double> x(4097);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = 0.5 * static_cast<double>(i);
  EXPECT_NEAR(estimate_hurst(x).hurst, 1.0, 1e-12);
}

// ------------------------------------------------------------------ NDJSON

TEST(Ndjson, RoundTrip) {
  VerificationReport r;
  r.check = "demo";
  r.seed = 18446744073709551615ULL;
  r.config = {{"hurst", 0.75}, {"level", std::int64_t{8}}};
  r.replicas = 3;
  r.statistic = 0.1;
  r.bound = 1.0 / 3;
  r.pass = true;
  r.notes = "a \"quoted\" note";
  r.details = {{"flag", true}, {"name", std::string("x")}};
  const std::string line = to_ndjson(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["check"], "demo");
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), r.seed);
  EXPECT_EQ(j["config"]["level"], 8);
  EXPECT_EQ(j["bound"].get<double>(), 1.0 / 3);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["hard_failure"], false);
  EXPECT_EQ(j["notes"], r.notes);
  EXPECT_EQ(j["details"]["flag"], true);
}
