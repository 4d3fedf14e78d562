// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace rwfbm {

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares; InsufficientDataError for fewer than two points
/// or constant x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Linear interpolation between order statistics (R type 7), p in [0, 1].
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

double mean(const std::vector<double>& values);

/// Limiting Kolmogorov survival function P(sup|B_bridge| > x).
double kolmogorov_sf(double x);

struct KsResult {
  double statistic = 0; ///< sup |F_n - F|
  double p_value = 1;
};

/// One-sample Kolmogorov-Smirnov test against N(0, variance), with the
/// Stephens finite-sample correction.
KsResult ks_test_normal(std::vector<double> samples, double variance);

struct CovarianceEstimate {
  double value = 0;
  double standard_error = 0;
};

/// Sample covariance with its delta-method standard error from the centered products.
CovarianceEstimate sample_covariance(const std::vector<double>& x, const std::vector<double>& y);

/// Seed of replica i under a master seed.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica);

/// Calls fn(i, replica_seed(master, i)) for i < count on up to `threads`
/// workers (0 = hardware concurrency) and returns the results in index order.
std::vector<std::vector<double>> run_replicas(
    std::uint64_t count, std::uint64_t master,
    const std::function<std::vector<double>(std::uint64_t, std::uint64_t)>& fn, unsigned threads = 0);

} // namespace rwfbm
