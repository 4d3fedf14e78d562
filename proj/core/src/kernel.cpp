// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "rwfbm/error.hpp"

namespace rwfbm {

Kernel::Kernel(double hurst) : hurst_(hurst), a_(hurst - 0.5), norm_(0) {
  if (!(hurst > 0 && hurst < 1))
    throw DomainError("Kernel: Hurst parameter must lie in (0, 1), got " + std::to_string(hurst));
  norm_ = 1.0 / boost::math::tgamma(hurst + 0.5);
}

double Kernel::power(double x) const noexcept {
  if (x == 0)
    return 0;
  return std::pow(x, a_);
}

double kernel_h(double s, double t, const Kernel& kernel) {
  if (s > t)
    throw DomainError("kernel_h: requires s <= t");
  const double neg = s < 0 ? kernel.power(-s) : 0.0;
  return kernel.norm() * (kernel.power(t - s) - neg);
}

void TruncationPolicy::validate() const {
  if (!(epsilon > 0))
    throw ConfigError("epsilon", "must be positive");
  if (!(max_past_horizon >= 0))
    throw ConfigError("max_past_horizon", "must be non-negative");
}

namespace {

constexpr double saturated = 1.8e19;

std::uint64_t to_count(double x) {
  if (!(x < saturated))
    return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(x);
}

// Lower bound on sum_{j=1}^k j^(2H-1).
double right_variance_lower_bound(std::uint64_t k, double H) {
  const double kk = static_cast<double>(k);
  if (2 * H - 1 >= 0)
    return std::pow(kk, 2 * H) / (2 * H);
  return (std::pow(kk + 1, 2 * H) - 1) / (2 * H);
}

// Binomial coefficients C(a, n), n = 0..N-1.
constexpr int series_terms = 48;

std::array<double, series_terms> binomials(double a) {
  std::array<double, series_terms> c{};
  c[0] = 1;
  for (int n = 1; n < series_terms; ++n)
    c[n] = c[n - 1] * (a - (n - 1)) / n;
  return c;
}

// g(v) = f_j(v) f_k(v) with f_k(v) = (k+v)^a - v^a, expanded for v >= 4 max(j,k):
// g(v) = v^(2a) sum_p e_p(j/v, k/v), e_p(x,y) = sum_{n=1}^{p-1} C(a,n) C(a,p-n) x^n y^(p-n).
struct PairSeries {
  double a;
  std::array<double, series_terms> c;

  explicit PairSeries(double a_) : a(a_), c(binomials(a_)) {}

  // e_p(x, y) for p = 2..series_terms-1.
  std::array<double, series_terms> coefficients(double x, double y) const {
    std::array<double, series_terms> xp{}, yp{}, e{};
    xp[0] = yp[0] = 1;
    for (int n = 1; n < series_terms; ++n) {
      xp[n] = xp[n - 1] * x;
      yp[n] = yp[n - 1] * y;
    }
    for (int p = 2; p < series_terms; ++p) {
      double s = 0;
      for (int n = 1; n < p; ++n)
        s += c[n] * c[p - n] * xp[n] * yp[p - n];
      e[p] = s;
    }
    return e;
  }

  // d-th derivative of g at X.
  double derivative(double j, double k, double X, int d) const {
    const auto e = coefficients(j / X, k / X);
    double s = 0;
    for (int p = 2; p < series_terms; ++p) {
      double ff = 1;
      for (int i = 0; i < d; ++i)
        ff *= 2 * a - p - i;
      s += e[p] * ff;
    }
    return std::pow(X, 2 * a - d) * s;
  }

  // Integral of g over [X, inf).
  double tail_integral(double j, double k, double X) const {
    const auto e = coefficients(j / X, k / X);
    double s = 0;
    for (int p = 2; p < series_terms; ++p)
      s += e[p] / (p - 1 - 2 * a);
    return std::pow(X, 2 * a + 1) * s;
  }
};

// sum_{v=A}^{B} g(v) by Euler-Maclaurin; B == inf allowed.
double euler_maclaurin_tail(double j, double k, double A, double B, double a) {
  const PairSeries ps(a);
  static constexpr double b[3] = {1.0 / 12, -1.0 / 720, 1.0 / 30240};
  const bool finite = std::isfinite(B);
  double s = ps.tail_integral(j, k, A) - (finite ? ps.tail_integral(j, k, B) : 0.0);
  s += 0.5 * (ps.derivative(j, k, A, 0) + (finite ? ps.derivative(j, k, B, 0) : 0.0));
  for (int i = 0; i < 3; ++i) {
    const int d = 2 * i + 1;
    s += b[i] * ((finite ? ps.derivative(j, k, B, d) : 0.0) - ps.derivative(j, k, A, d));
  }
  return s;
}

struct Neumaier {
  double sum = 0, comp = 0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// sum_{v=1}^{V} f_j(v) f_k(v), unscaled.
double left_pair_sum(std::uint64_t j, std::uint64_t k, std::uint64_t V, const Kernel& kernel) {
  if (V == 0 || kernel.exponent() == 0 || j == 0 || k == 0)
    return 0;
  const std::uint64_t direct_limit = std::max<std::uint64_t>(4 * std::max(j, k), 1024);
  const std::uint64_t v0 = std::min(V, direct_limit);
  Neumaier acc;
  for (std::uint64_t v = 1; v <= v0; ++v)
    acc.add(past_difference(j, v, kernel) * past_difference(k, v, kernel));
  if (V > v0) {
    const double B = V == std::numeric_limits<std::uint64_t>::max()
                         ? std::numeric_limits<double>::infinity()
                         : static_cast<double>(V);
    acc.add(euler_maclaurin_tail(static_cast<double>(j), static_cast<double>(k),
                                 static_cast<double>(v0 + 1), B, kernel.exponent()));
  }
  return acc.value();
}

} // namespace

double tail_variance_bound(std::uint64_t k, std::uint64_t V, const Kernel& kernel) {
  const double a = kernel.exponent();
  const double H = kernel.hurst();
  if (a == 0 || k == 0)
    return 0;
  if (V == 0)
    return std::numeric_limits<double>::infinity();
  const double kk = static_cast<double>(k);
  return kk * kk * a * a * std::pow(static_cast<double>(V), 2 * H - 2) / (2 - 2 * H);
}

std::uint64_t tail_cutoff(std::uint64_t k, unsigned m, const Kernel& kernel,
                          const TruncationPolicy& policy) {
  policy.validate();
  const double a = kernel.exponent();
  const double H = kernel.hurst();
  if (a == 0 || k == 0)
    return 0;
  const double kk = static_cast<double>(k);
  // k^2 a^2 V^(2H-2) / (2-2H) <= eps^2 * var / 2, the 2 being a safety factor.
  const double log_rhs = 2 * std::log(policy.epsilon) + std::log(right_variance_lower_bound(k, H)) +
                         std::log(2 - 2 * H) - std::log(2.0) - 2 * std::log(kk) - 2 * std::log(std::abs(a));
  const double logV = log_rhs / (2 * H - 2);
  std::uint64_t V = logV > std::log(saturated) ? std::numeric_limits<std::uint64_t>::max()
                                               : to_count(std::ceil(std::exp(logV)));
  V = std::max<std::uint64_t>(V, 1);
  if (std::isfinite(policy.max_past_horizon))
    V = std::min(V, to_count(std::floor(std::ldexp(policy.max_past_horizon, 2 * static_cast<int>(m)))));
  return V;
}

double level_scale(unsigned m, const Kernel& kernel) {
  return std::exp2(-2.0 * kernel.hurst() * m) * kernel.norm();
}

double past_difference(std::uint64_t k, std::uint64_t v, const Kernel& kernel) {
  const double a = kernel.exponent();
  const double vv = static_cast<double>(v);
  return std::pow(vv, a) * std::expm1(a * std::log1p(static_cast<double>(k) / vv));
}

MovingAverageWeights moving_average_weights(std::uint64_t k, unsigned m, const Kernel& kernel,
                                            const TruncationPolicy& policy) {
  return moving_average_weights(k, m, kernel, tail_cutoff(k, m, kernel, policy));
}

MovingAverageWeights moving_average_weights(std::uint64_t k, unsigned m, const Kernel& kernel,
                                            std::uint64_t cutoff) {
  if (k == 0)
    throw DomainError("moving_average_weights: k must be at least 1");
  if (cutoff > (std::uint64_t{1} << 32))
    throw ResourceLimitError("moving_average_weights: window of " + std::to_string(cutoff) +
                             " past steps is too large to tabulate");
  MovingAverageWeights w;
  w.tail_cutoff = cutoff;
  w.first_index = -static_cast<std::int64_t>(cutoff);
  w.values.resize(cutoff + k);
  const double c = level_scale(m, kernel);
  const bool flat = kernel.exponent() == 0;
  for (std::uint64_t v = 1; v <= cutoff; ++v)
    w.values[cutoff - v] = flat ? 0.0 : c * past_difference(k, v, kernel);
  for (std::uint64_t r = 0; r < k; ++r)
    w.values[cutoff + r] = c * kernel.power(static_cast<double>(k - r));
  return w;
}

double exact_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel,
                           const TruncationPolicy& policy) {
  return exact_second_moment(k, m, kernel, tail_cutoff(k, m, kernel, policy));
}

double exact_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel, std::uint64_t cutoff) {
  return exact_covariance(k, k, m, kernel, cutoff);
}

double exact_covariance(std::uint64_t j, std::uint64_t k, unsigned m, const Kernel& kernel,
                        std::uint64_t cutoff) {
  if (j == 0 || k == 0)
    return 0;
  Neumaier right;
  for (std::uint64_t r = 0; r < std::min(j, k); ++r)
    right.add(kernel.power(static_cast<double>(j - r)) * kernel.power(static_cast<double>(k - r)));
  const double c = level_scale(m, kernel);
  return c * c * (right.value() + left_pair_sum(j, k, cutoff, kernel));
}

double tail_second_moment(std::uint64_t k, unsigned m, const Kernel& kernel, std::uint64_t cutoff) {
  if (k == 0 || kernel.exponent() == 0 || cutoff == std::numeric_limits<std::uint64_t>::max())
    return 0;
  const double c = level_scale(m, kernel);
  const double kk = static_cast<double>(k);
  const std::uint64_t direct_limit = std::max<std::uint64_t>(4 * k, 1024);
  Neumaier acc;
  std::uint64_t v = cutoff + 1;
  for (; v <= direct_limit; ++v) {
    const double f = past_difference(k, v, kernel);
    acc.add(f * f);
  }
  acc.add(euler_maclaurin_tail(kk, kk, static_cast<double>(v), std::numeric_limits<double>::infinity(),
                               kernel.exponent()));
  return c * c * acc.value();
}

} // namespace rwfbm
