// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace rwfbm {

/// Moving-average kernel h(s,t) = [(t-s)^a - (-s)_+^a] / Gamma(H + 1/2), a = H - 1/2,
/// with 0^a = 0 for every H.
class Kernel {
public:
  /// Throws DomainError unless 0 < H < 1.
  explicit Kernel(double hurst);

  double hurst() const noexcept { return hurst_; }
  double exponent() const noexcept { return a_; }
  double norm() const noexcept { return norm_; } ///< 1 / Gamma(H + 1/2)
  /// Pathwise convergence of the construction is only established for H > 1/4.
  bool convergence_proven() const noexcept { return hurst_ > 0.25; }

  /// x^a for x > 0, and 0 for x == 0.
  double power(double x) const noexcept;

private:
  double hurst_;
  double a_;
  double norm_;
};

/// Throws DomainError when s > t.
double kernel_h(double s, double t, const Kernel& kernel);

struct TruncationPolicy {
  /// Target ratio of truncated-tail to full standard deviation.
  double epsilon = 1e-6;
  /// Hard cap on the past window, in time units.
  double max_past_horizon = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Number V of past steps kept for grid index k at level m: the smaller of the
/// tail-bound cutoff and max_past_horizon * 4^m. Saturates at uint64 max.
std::uint64_t tail_cutoff(std::uint64_t k, unsigned m, const Kernel& kernel,
                          const TruncationPolicy& policy);

/// Upper bound on the truncated tail variance beyond V, relative to the
/// unscaled sum (no 2^-2Hm / Gamma factor).
double tail_variance_bound(std::uint64_t k, std::uint64_t V, const Kernel& kernel);

struct MovingAverageWeights {
  std::int64_t first_index = 0;  ///< -V
  std::vector<double> values;    ///< weight(r) for r = first_index .. k-1
  std::uint64_t tail_cutoff = 0; ///< V

  double operator[](std::int64_t r) const {
    return values[static_cast<std::size_t>(r - first_index)];
  }
};

/// Scale 2^-2Hm / Gamma(H + 1/2) shared by all weights at level m.
double level_scale(unsigned m, const Kernel& kernel);

/// (k+v)^a - v^a for v >= 1, in a form that avoids cancellation for v >> k.
double past_difference(std::uint64_t k, std::uint64_t v, const Kernel& kernel);

MovingAverageWeights moving_average_weights(std::uint64_t k, unsigned m, const Kernel& kernel,
                                            const TruncationPolicy& policy);
MovingAverageWeights moving_average_weights(std::uint64_t k, unsigned m, const Kernel& kernel,
                                            std::uint64_t cutoff);

/// Sum of squared weights over the truncated window. Large windows use an
/// Euler-Maclaurin tail with a series integral, so huge cutoffs are cheap.
double exact_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel,
                           const TruncationPolicy& policy);
double exact_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel,
                           std::uint64_t cutoff);
/// Sum of squared weights beyond the window, v > cutoff.
double tail_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel, std::uint64_t cutoff);
/// Sum of weight products over the common window, for Cov(B(t_j), B(t_k)).
double exact_covariance(std::uint64_t j, std::uint64_t k, unsigned m, const Kernel& kernel,
                        std::uint64_t cutoff);

} // namespace rwfbm
