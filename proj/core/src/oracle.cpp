// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rwfbm/error.hpp"

namespace rwfbm {

namespace {

void check_hurst(double H) {
  if (!(H > 0 && H < 1))
    throw DomainError("Hurst parameter must lie in (0, 1), got " + std::to_string(H));
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> xgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double lo, double hi, double& result, double& err) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double fc = f(c);
  double k = fc * wgk[7];
  double g = fc * wg[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * xgk[i];
    const double s = f(c - x) + f(c + x);
    k += wgk[i] * s;
    if (i % 2 == 1)
      g += wg[i / 2] * s;
  }
  result = k * h;
  err = std::abs((k - g) * h);
}

template <class F>
double adaptive(const F& f, double lo, double hi, double tol, double& err_total, int depth = 0) {
  double r, e;
  gk15(f, lo, hi, r, e);
  if (e <= tol || depth >= 40) {
    err_total += e;
    return r;
  }
  const double mid = 0.5 * (lo + hi);
  return adaptive(f, lo, mid, tol / 2, err_total, depth + 1) +
         adaptive(f, mid, hi, tol / 2, err_total, depth + 1);
}

// int_0^eps s^b (1+s)^c ds by the binomial series in s.
double small_power_integral(double b, double c, double eps) {
  double sum = 0, coeff = 1, sp = std::pow(eps, b + 1);
  for (int n = 0; n < 30; ++n) {
    sum += coeff * sp / (b + n + 1);
    coeff *= (c - n) / (n + 1);
    sp *= eps;
  }
  return sum;
}

// int_X^inf ((1+s)^a - s^a)^2 ds from the expansion in 1/s.
double large_tail_integral(double a, double X) {
  constexpr int P = 60;
  std::array<double, P> c{};
  c[0] = 1;
  for (int n = 1; n < P; ++n)
    c[n] = c[n - 1] * (a - (n - 1)) / n;
  double s = 0, xp = 1 / X;
  for (int p = 2; p < P; ++p) {
    xp /= X;
    double e = 0;
    for (int n = 1; n < p; ++n)
      e += c[n] * c[p - n];
    s += e * xp / (p - 1 - 2 * a);
  }
  return std::pow(X, 2 * a + 1) * s;
}

} // namespace

NormalizationConstant variance_constant(double H) {
  check_hurst(H);
  const double a = H - 0.5;
  NormalizationConstant out;
  out.hurst = H;
  const double g2 = std::pow(std::tgamma(H + 0.5), 2);
  if (a == 0) {
    out.value = 1.0;
    return out;
  }
  auto F = [a](double s) {
    const double d = std::pow(1 + s, a) - (s > 0 ? std::pow(s, a) : 0.0);
    return d * d;
  };
  double err = 0;
  double I = 0;
  // Dyadic grading toward the endpoint singularity at 0.
  constexpr int levels = 50;
  for (int j = 0; j < levels; ++j)
    I += adaptive(F, std::ldexp(1.0, -j - 1), std::ldexp(1.0, -j), 1e-14, err);
  const double eps = std::ldexp(1.0, -levels);
  I += small_power_integral(0, 2 * a, eps) - 2 * small_power_integral(a, a, eps) +
       small_power_integral(2 * a, 0, eps);
  I += adaptive(F, 1.0, 4.0, 1e-14, err);
  I += large_tail_integral(a, 4.0);
  out.value = (1 / (2 * H) + I) / g2;
  out.error_estimate = err / g2;
  return out;
}

NormalizationConstant variance_constant_double_exponential(double H) {
  check_hurst(H);
  const double a = H - 0.5;
  NormalizationConstant out;
  out.hurst = H;
  const double g2 = std::pow(std::tgamma(H + 0.5), 2);
  if (a == 0) {
    out.value = 1.0;
    return out;
  }
  auto F = [a](double s) {
    if (s <= 0)
      return 1.0;
    const double d = std::pow(s, a) * std::expm1(a * std::log1p(1 / s));
    return d * d;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double e1 = 0, e2 = 0, l1 = 0;
  const double i1 = ts.integrate(F, 0.0, 1.0, 1e-13, &e1, &l1);
  const double i2 = es.integrate(F, 1.0, std::numeric_limits<double>::infinity(), 1e-13, &e2, &l1);
  out.value = (1 / (2 * H) + i1 + i2) / g2;
  out.error_estimate = (std::abs(e1 * i1) + std::abs(e2 * i2)) / g2;
  return out;
}

double fbm_covariance(double s, double t, double H) { return fbm_covariance(s, t, variance_constant(H)); }

double fbm_covariance(double s, double t, const NormalizationConstant& vh) {
  if (s < 0 || t < 0)
    throw DomainError("fbm_covariance: times must be non-negative");
  const double h2 = 2 * vh.hurst;
  return 0.5 * vh.value * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

struct ReferenceSampler::Factor {
  Eigen::MatrixXd L;
};

ReferenceSampler::ReferenceSampler(std::vector<double> grid, double hurst) : grid_(std::move(grid)) {
  check_hurst(hurst);
  if (grid_.empty() || grid_.size() > max_points)
    throw DomainError("ReferenceSampler: grid size must be in [1, " + std::to_string(max_points) + "]");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!(grid_[i] > 0) || (i > 0 && !(grid_[i] > grid_[i - 1])))
      throw DomainError("ReferenceSampler: grid must be positive and strictly increasing");
  }
  const auto vh = variance_constant(hurst);
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      C(i, j) = C(j, i) = fbm_covariance(grid_[static_cast<std::size_t>(i)], grid_[static_cast<std::size_t>(j)], vh);
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    throw FactorizationError("ReferenceSampler: covariance matrix is not numerically positive definite");
  factor_ = std::make_unique<Factor>();
  factor_->L = llt.matrixL();
}

ReferenceSampler::~ReferenceSampler() = default;
ReferenceSampler::ReferenceSampler(ReferenceSampler&&) noexcept = default;
ReferenceSampler& ReferenceSampler::operator=(ReferenceSampler&&) noexcept = default;

std::vector<double> ReferenceSampler::sample(std::uint64_t seed) const {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z(i) = normal(gen);
  Eigen::VectorXd y = factor_->L.triangularView<Eigen::Lower>() * z;
  return std::vector<double>(y.data(), y.data() + n);
}

std::vector<double> reference_sample(const std::vector<double>& grid, double hurst, std::uint64_t seed) {
  return ReferenceSampler(grid, hurst).sample(seed);
}

double brute_force_recompute(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, std::uint64_t k,
                             std::uint64_t cutoff) {
  const double H = kernel.hurst();
  const double a = H - 0.5;
  const double scale = std::pow(2.0, -2 * H * m) / std::tgamma(H + 0.5);
  const double up = std::pow(2.0, m);
  auto pw = [a](double x) { return x == 0 ? 0.0 : std::pow(x, a); };
  double sum = 0;
  const auto kk = static_cast<std::int64_t>(k);
  for (std::int64_t r = -static_cast<std::int64_t>(cutoff); r < kk; ++r) {
    const double w = scale * (pw(static_cast<double>(kk - r)) - (r < 0 ? pw(static_cast<double>(-r)) : 0.0));
    const double step = std::round((bm.grid_value(m, r + 1) - bm.grid_value(m, r)) * up);
    sum += w * step;
  }
  return sum;
}

} // namespace rwfbm
