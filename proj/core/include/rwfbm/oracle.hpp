// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rwfbm/hierarchy.hpp"
#include "rwfbm/kernel.hpp"

namespace rwfbm {

/// Variance at t = 1 of the moving-average fBM normalized by 1/Gamma(H + 1/2):
/// V_H = Gamma(H+1/2)^-2 [1/(2H) + int_0^inf ((1+s)^a - s^a)^2 ds].
struct NormalizationConstant {
  double hurst = 0.5;
  double value = 1.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod on a graded substitution plus an analytic series tail.
NormalizationConstant variance_constant(double hurst);
/// Independent route: tanh-sinh on [0,1] and exp-sinh on [1,inf).
NormalizationConstant variance_constant_double_exponential(double hurst);

/// (V_H / 2)(s^2H + t^2H - |t-s|^2H); DomainError for negative times.
double fbm_covariance(double s, double t, double hurst);
double fbm_covariance(double s, double t, const NormalizationConstant& vh);

/// Exact Gaussian sampler on a fixed grid via a dense Cholesky factor.
class ReferenceSampler {
public:
  static constexpr std::size_t max_points = 4096;

  /// Throws DomainError for an empty, unsorted or oversized grid and
  /// FactorizationError when the covariance is not numerically positive definite.
  ReferenceSampler(std::vector<double> grid, double hurst);
  ~ReferenceSampler();
  ReferenceSampler(ReferenceSampler&&) noexcept;
  ReferenceSampler& operator=(ReferenceSampler&&) noexcept;

  std::vector<double> sample(std::uint64_t seed) const;
  const std::vector<double>& grid() const noexcept { return grid_; }

private:
  struct Factor;
  std::vector<double> grid_;
  std::unique_ptr<Factor> factor_;
};

std::vector<double> reference_sample(const std::vector<double>& grid, double hurst, std::uint64_t seed);

/// Naive left-to-right sum of weight(r) X~_m(r+1), r = -cutoff .. k-1, with
/// weights formed by direct subtraction and steps read from B_m differences.
double brute_force_recompute(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, std::uint64_t k,
                             std::uint64_t cutoff);

} // namespace rwfbm
