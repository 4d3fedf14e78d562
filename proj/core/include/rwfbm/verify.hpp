// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rwfbm/hierarchy.hpp"
#include "rwfbm/kernel.hpp"

namespace rwfbm {

using ReportValue = std::variant<std::int64_t, double, std::string, bool>;
using ReportFields = std::vector<std::pair<std::string, ReportValue>>;

struct VerificationReport {
  std::string check;
  std::uint64_t seed = 0;
  ReportFields config;
  std::uint64_t replicas = 0;
  double statistic = 0;
  double bound = 0;
  bool pass = false;
  /// A failed exact identity; statistical checks never set this.
  bool hard_failure = false;
  std::string notes;
  ReportFields details;
};

/// One JSON object, no trailing newline. Fields: check, seed, config, replicas,
/// statistic, bound, pass, hard_failure, notes, details.
std::string to_ndjson(const VerificationReport& report);
bool any_hard_failure(const std::vector<VerificationReport>& reports);

/// log*(x) = max(1, ln x).
double log_star(double x);

/// alpha(H,K) m 2^(-beta m) for consecutive fBM levels; DomainError unless
/// H lies in (1/4, 1/2) or (1/2, 1).
struct RateBound {
  double alpha = 0;
  double beta = 0;
  double budget_factor = 8;

  double threshold(unsigned m) const;
  /// budget_factor (K 4^m)^(1-C)
  double exception_budget(double K, unsigned m, double C) const;
  /// The sup-over-finer-levels form: alpha / (1 - 2^-beta)^2, budget factor 9.
  RateBound compounded() const;
};

RateBound level_difference_bound(double hurst, double K);
double beta_exponent(double hurst); ///< min(2H - 1/2, 1/2)

double time_lag_threshold(double K, double C, unsigned m);   ///< (1.5 C K log*K)^(1/2) m^(1/2) 2^-m
double bm_difference_threshold(double K, unsigned m);        ///< K^(1/4) (log*K)^(3/4) m 2^(-m/2)
double power_budget(double factor, double K, unsigned m, double C); ///< factor (K 4^m)^(1-C)

/// T_j(k) 4^-j - k 4^-(j-1) for every complete bridge k = 1.. at level j >= 1.
std::vector<double> time_lags(const Hierarchy& h, unsigned level);

/// Refinement S~_j(T_j(k)) = 2 S~_{j-1}(k) and B_j(T_j(k) 4^-j) = B_{j-1}(k 4^-(j-1))
/// for every complete bridge at levels 1..m_max; details carry the max time lag per level.
/// Needs stopping times kept.
VerificationReport check_exact_identities(Hierarchy& h, unsigned m_max, double K);
/// Both sides.
VerificationReport check_exact_identities(TwoSidedBm& bm, unsigned m_max, double K);

struct BoundsConfig {
  double hurst = 0.75;
  unsigned level = 8;
  double horizon = 1;
  double C = 3;
  std::uint64_t replicas = 500;
  std::uint64_t seed = 1;
  double epsilon = 1e-6;
  double past_horizon = 1; ///< past window of the fBM sums, in time units
  unsigned threads = 0;
};

/// Exceedance frequencies of the time-lag, BM-difference, W - B_m (proxied by the
/// next level over the continuum) and fBM-difference maxima against their
/// thresholds. Pass iff frequency <= budget + 2/sqrt(replicas).
/// ConfigError for C <= 1 or replicas < 100.
std::vector<VerificationReport> check_probabilistic_bounds(const BoundsConfig& config);

struct RateConfig {
  double hurst = 0.75;
  unsigned m_min = 6;
  unsigned m_max = 10;
  double horizon = 1;
  std::uint64_t replicas = 200;
  std::uint64_t seed = 1;
  double epsilon = 1e-6;
  double past_horizon = 1;
  unsigned threads = 0;
};

/// median over replicas of max_k |B_{m+1}^H(t_k) - B_m^H(t_k)| on the level-m grid,
/// for m = m_min..m_max.
std::vector<double> median_level_differences(const RateConfig& config);

/// Slope of log2(median / m) against m, compared with -beta(H) within 0.20.
/// InsufficientDataError for fewer than four levels.
VerificationReport fit_convergence_rate(const RateConfig& config);

struct DistributionConfig {
  double hurst = 0.75;
  unsigned level = 10;
  double horizon = 1;
  std::uint64_t replicas = 2000;
  std::uint64_t seed = 1;
  double epsilon = 1e-6;
  double past_horizon = 16;
  unsigned coefficient_level = 6;      ///< level of the deterministic coefficient checks
  unsigned self_similarity_shift = 1; ///< m0 in a = 4^m0
  unsigned threads = 0;
};

/// Stationarity and self-similarity of the coefficients (deterministic), a
/// Kolmogorov-Smirnov test of B_m^H(1) at level 0.01, and Cov(B_m^H(s), B_m^H(t))
/// within 3 standard errors of the fBM covariance for (s,t) in
/// {(0.25,0.5), (0.5,1), (1,1)}. Needs horizon >= 1.
std::vector<VerificationReport> check_distributional_properties(const DistributionConfig& config);

/// The three pieces of B_m^H(t_m) - B_m^(H,delta)(t_m) - singular term, with the
/// fBM sum cut at the grid point of -1/delta.
struct DeltaTruncationTerms {
  double E = 0; ///< window (t - delta, t], less the singular term
  double F = 0; ///< window (-delta, 0]
  double G = 0; ///< boundary term at -1/delta
  double total() const { return E + F + G; }
};

/// Needs the right walk through t and the left walk through 1/delta at level m.
/// DomainError unless 0 < delta <= t.
DeltaTruncationTerms delta_truncation_terms(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double t, double delta);
/// The same quantity from the full truncated sum minus the delta-windowed sum
/// minus the singular term. O(4^m / delta) work; for cross-checks.
double delta_truncation_direct(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double t, double delta);

/// Bounds on Var(Gamma E), Var(Gamma F), Var(Gamma G).
struct DeltaTruncationVariances {
  double E = 0;
  double F = 0;
  double G = 0;
};
DeltaTruncationVariances delta_truncation_variance_bounds(double hurst, double t, double delta);
/// (2 C log*(1/delta))^(1/2) (VE + VF + VG)^(1/2) / Gamma(H + 1/2)
double delta_truncation_budget(double hurst, double t, double delta, double C);

struct DeltaTruncationConfig {
  double hurst = 0.75;
  double t = 1;
  double delta = 0.01;
  unsigned level = 10;
  std::uint64_t replicas = 200;
  std::uint64_t seed = 1;
  double C = 2;
  double percentile = 0.9;
  unsigned threads = 0;
};

/// 90th percentile of |E + F + G| over replicas against delta_truncation_budget.
VerificationReport check_delta_truncation(const DeltaTruncationConfig& config);

struct HurstEstimate {
  double hurst = 0;
  bool degenerate = false;
  std::vector<std::uint64_t> lags;
  std::vector<double> mean_square;
};

/// Variogram slope over dyadic lags min_lag .. n/8: log2 E|X(i+l) - X(i)|^2 = 2H log2 l + c.
/// InsufficientDataError below 1024 points. A path with no variation at some
/// lag is flagged degenerate with hurst = NaN.
HurstEstimate estimate_hurst(const std::vector<double>& values, std::uint64_t min_lag = 1);

} // namespace rwfbm
