// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "rwfbm/error.hpp"
#include "rwfbm/step_source.hpp"

namespace rwfbm {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientDataError("linear_fit: need at least two (x, y) pairs");
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0)
    throw InsufficientDataError("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty())
    throw InsufficientDataError("quantile of an empty sample");
  if (!(p >= 0 && p <= 1))
    throw DomainError("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double mean(const std::vector<double>& values) {
  if (values.empty())
    throw InsufficientDataError("mean of an empty sample");
  double s = 0;
  for (double v : values)
    s += v;
  return s / static_cast<double>(values.size());
}

double kolmogorov_sf(double x) {
  if (x <= 0)
    return 1.0;
  if (x < 1.18) {
    // Theta-function form, accurate for small x.
    const double y = std::exp(-M_PI * M_PI / (8 * x * x));
    double s = 0;
    for (int k = 1; k < 40; k += 2)
      s += std::pow(y, k * k);
    return 1.0 - std::sqrt(2 * M_PI) / x * s;
  }
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18)
      break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> samples, double variance) {
  if (samples.empty())
    throw InsufficientDataError("ks_test_normal: empty sample");
  if (!(variance > 0))
    throw DomainError("ks_test_normal: variance must be positive");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double sd = std::sqrt(variance);
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = 0.5 * std::erfc(-samples[i] / (sd * M_SQRT2));
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

CovarianceEstimate sample_covariance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientDataError("sample_covariance: need at least two paired samples");
  const double mx = mean(x), my = mean(y);
  const auto n = static_cast<double>(x.size());
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    prod[i] = (x[i] - mx) * (y[i] - my);
  const double c = mean(prod);
  double ss = 0;
  for (double p : prod)
    ss += (p - c) * (p - c);
  CovarianceEstimate e;
  e.value = c * n / (n - 1);
  e.standard_error = std::sqrt(ss / (n - 1) / n);
  return e;
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return mix64(mix64(master ^ 0x5851f42d4c957f2dULL) + replica);
}

std::vector<std::vector<double>> run_replicas(
    std::uint64_t count, std::uint64_t master,
    const std::function<std::vector<double>(std::uint64_t, std::uint64_t)>& fn, unsigned threads) {
  std::vector<std::vector<double>> out(count);
  if (threads == 0)
    threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i)
      out[i] = fn(i, replica_seed(master, i));
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::uint64_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i, replica_seed(master, i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back(worker);
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

} // namespace rwfbm
