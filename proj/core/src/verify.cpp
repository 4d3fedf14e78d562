// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rwfbm/error.hpp"
#include "rwfbm/fbm.hpp"
#include "rwfbm/oracle.hpp"
#include "rwfbm/stats.hpp"

namespace rwfbm {

double log_star(double x) { return std::max(1.0, std::log(x)); }

double beta_exponent(double hurst) { return std::min(2 * hurst - 0.5, 0.5); }

double power_budget(double factor, double K, unsigned m, double C) {
  return factor * std::pow(std::ldexp(K, 2 * static_cast<int>(m)), 1 - C);
}

double RateBound::threshold(unsigned m) const {
  return alpha * static_cast<double>(m) * std::exp2(-beta * static_cast<double>(m));
}

double RateBound::exception_budget(double K, unsigned m, double C) const {
  return power_budget(budget_factor, K, m, C);
}

RateBound RateBound::compounded() const {
  RateBound r = *this;
  r.alpha = alpha / std::pow(1 - std::exp2(-beta), 2);
  r.budget_factor = 9;
  return r;
}

RateBound level_difference_bound(double hurst, double K) {
  if (!(hurst > 0.25 && hurst < 1) || hurst == 0.5)
    throw DomainError("rate bound needs H in (1/4, 1/2) or (1/2, 1), got " + std::to_string(hurst));
  if (!(K > 0))
    throw DomainError("horizon must be positive");
  const double a = std::abs(hurst - 0.5);
  const double L = log_star(K);
  double inner = a / std::sqrt(1 - hurst);
  if (hurst < 0.5)
    inner += std::pow(L, 0.25) * (8 * std::pow(K, 0.25) + 36 * a * std::pow(K, hurst - 0.25));
  else
    inner += std::pow(L, 0.25) * (5 + 312 * a) * std::pow(K, hurst - 0.25);
  RateBound r;
  r.alpha = std::sqrt(L) / std::tgamma(hurst + 0.5) * inner;
  r.beta = beta_exponent(hurst);
  r.budget_factor = 8;
  return r;
}

double time_lag_threshold(double K, double C, unsigned m) {
  return std::sqrt(1.5 * C * K * log_star(K)) * std::sqrt(static_cast<double>(m)) *
         std::exp2(-static_cast<double>(m));
}

double bm_difference_threshold(double K, unsigned m) {
  return std::pow(K, 0.25) * std::pow(log_star(K), 0.75) * static_cast<double>(m) *
         std::exp2(-0.5 * static_cast<double>(m));
}

bool any_hard_failure(const std::vector<VerificationReport>& reports) {
  return std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.hard_failure; });
}

// ---------------------------------------------------------------- identities

std::vector<double> time_lags(const Hierarchy& h, unsigned level) {
  if (level == 0)
    throw DomainError("time lags start at level 1");
  const WalkLevel& fine = h.level(level);
  const double fdt = std::ldexp(1.0, -2 * static_cast<int>(level));
  const double cdt = 4 * fdt;
  std::vector<double> out;
  for (std::uint64_t k = 1; k <= fine.bridges(); ++k)
    out.push_back(static_cast<double>(fine.stopping_time(k)) * fdt - static_cast<double>(k) * cdt);
  return out;
}

namespace {

struct IdentityScan {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::vector<double> max_lag; ///< index j - 1 for level j
};

IdentityScan scan_identities(Hierarchy& h, unsigned m_max, double K) {
  h.ensure(m_max, K);
  IdentityScan out;
  for (unsigned j = 1; j <= m_max; ++j) {
    const WalkLevel& fine = h.level(j);
    const WalkLevel& coarse = h.level(j - 1);
    if (!fine.has_stopping_times())
      throw Error("check_exact_identities: stopping times were not kept at level " + std::to_string(j));
    const BmApprox bf = h.bm(j), bc = h.bm(j - 1);
    const double fine_dt = bf.spacing(), coarse_dt = bc.spacing();
    double lag = 0;
    std::uint64_t prev = 0;
    for (std::uint64_t k = 1; k <= fine.bridges(); ++k) {
      const std::uint64_t T = fine.stopping_time(k);
      ++out.checked;
      const std::int64_t sf = fine.partial_sum(T), sc = coarse.partial_sum(k);
      const bool bridge_ok = T > prev && std::abs(sf - fine.partial_sum(prev)) == 2;
      if (sf != 2 * sc || !bridge_ok || bf.grid_value(T) != bc.grid_value(k))
        ++out.violations;
      lag = std::max(lag, std::abs(static_cast<double>(T) * fine_dt - static_cast<double>(k) * coarse_dt));
      prev = T;
    }
    out.max_lag.push_back(lag);
  }
  return out;
}

VerificationReport identity_report(std::uint64_t seed, unsigned m_max, double K) {
  VerificationReport r;
  r.check = "exact_identities";
  r.seed = seed;
  r.config = {{"level", static_cast<std::int64_t>(m_max)}, {"horizon", K}};
  r.replicas = 1;
  return r;
}

void finish_identity_report(VerificationReport& r, const IdentityScan& scan, const std::string& prefix) {
  r.statistic += static_cast<double>(scan.violations);
  r.details.emplace_back(prefix + "checked", static_cast<std::int64_t>(scan.checked));
  for (std::size_t j = 0; j < scan.max_lag.size(); ++j)
    r.details.emplace_back(prefix + "max_lag_level_" + std::to_string(j + 1), scan.max_lag[j]);
}

void close_identity_report(VerificationReport& r) {
  r.bound = 0;
  r.pass = r.statistic == 0;
  r.hard_failure = !r.pass;
  r.notes = r.pass ? "refinement and grid identities hold at every complete bridge"
                   : "identity violations: implementation defect";
}

} // namespace

VerificationReport check_exact_identities(Hierarchy& h, unsigned m_max, double K) {
  if (!(K > 0))
    throw DomainError("horizon must be positive");
  VerificationReport r = identity_report(h.source().master_seed(), m_max, K);
  finish_identity_report(r, scan_identities(h, m_max, K), std::string(to_string(h.side())) + "_");
  close_identity_report(r);
  return r;
}

VerificationReport check_exact_identities(TwoSidedBm& bm, unsigned m_max, double K) {
  if (!(K > 0))
    throw DomainError("horizon must be positive");
  VerificationReport r = identity_report(bm.master_seed(), m_max, K);
  finish_identity_report(r, scan_identities(bm.right(), m_max, K), "right_");
  finish_identity_report(r, scan_identities(bm.left(), m_max, K), "left_");
  close_identity_report(r);
  return r;
}

// ---------------------------------------------------------------- bounds

namespace {

TruncationPolicy make_policy(double epsilon, double past) {
  TruncationPolicy p;
  p.epsilon = epsilon;
  p.max_past_horizon = past;
  p.validate();
  return p;
}

// Largest |fine(t) - coarse(t)| over the fine grid, coarse interpolated linearly.
double max_interpolated_difference(const std::vector<double>& fine, const std::vector<double>& coarse) {
  double best = 0;
  const std::size_t end = std::min(fine.size(), 4 * (coarse.size() - 1) + 1);
  for (std::size_t j = 0; j < end; ++j) {
    const std::size_t k = j / 4, r = j % 4;
    const double c = r == 0 ? coarse[k] : coarse[k] + 0.25 * static_cast<double>(r) * (coarse[k + 1] - coarse[k]);
    best = std::max(best, std::abs(fine[j] - c));
  }
  return best;
}

double max_strided_difference(const std::vector<double>& fine, const std::vector<double>& coarse) {
  double best = 0;
  for (std::size_t k = 0; k < coarse.size() && 4 * k < fine.size(); ++k)
    best = std::max(best, std::abs(fine[4 * k] - coarse[k]));
  return best;
}

std::vector<double> level_values(const WalkLevel& L, std::uint64_t n) {
  std::vector<double> v(n + 1);
  const double s = std::ldexp(1.0, -static_cast<int>(L.level()));
  for (std::uint64_t i = 0; i <= n; ++i)
    v[i] = static_cast<double>(L.partial_sum(i)) * s;
  return v;
}

ReportFields bounds_fields(const BoundsConfig& c) {
  return {{"hurst", c.hurst},     {"level", static_cast<std::int64_t>(c.level)},
          {"horizon", c.horizon}, {"C", c.C},
          {"epsilon", c.epsilon}, {"past_horizon", c.past_horizon}};
}

VerificationReport exceedance_report(const std::string& name, const BoundsConfig& c, const std::vector<double>& stats,
                                     double threshold, double budget, const std::string& notes) {
  VerificationReport r;
  r.check = name;
  r.seed = c.seed;
  r.config = bounds_fields(c);
  r.replicas = c.replicas;
  std::uint64_t over = 0;
  for (double s : stats)
    over += s >= threshold;
  const double allowance = 2 / std::sqrt(static_cast<double>(c.replicas));
  r.statistic = stats.empty() ? 0.0 : static_cast<double>(over) / static_cast<double>(stats.size());
  r.bound = budget + allowance;
  r.pass = r.statistic <= r.bound;
  r.notes = notes;
  r.details = {{"threshold", threshold}, {"budget", budget}, {"allowance", allowance}};
  if (!stats.empty()) {
    r.details.emplace_back("median_max", median(stats));
    r.details.emplace_back("largest_max", *std::max_element(stats.begin(), stats.end()));
  }
  return r;
}

} // namespace

std::vector<VerificationReport> check_probabilistic_bounds(const BoundsConfig& c) {
  if (!(c.C > 1))
    throw ConfigError("C", "must exceed 1, otherwise the exception budgets diverge");
  if (c.replicas < 100)
    throw ConfigError("replicas", "at least 100 replicas are required");
  if (!(c.horizon > 0))
    throw ConfigError("horizon", "must be positive");
  const Kernel kernel(c.hurst);
  const TruncationPolicy policy = make_policy(c.epsilon, c.past_horizon);
  const unsigned m = c.level;
  const double K = c.horizon;
  const bool fbm = c.C >= 3 && c.hurst > 0.25 && c.hurst != 0.5;
  const std::uint64_t N = grid_last_index(K, m);

  std::vector<std::vector<double>> per;
  if (N > 0) {
    per = run_replicas(
        c.replicas, c.seed,
        [&](std::uint64_t, std::uint64_t seed) {
          HierarchyOptions ro, lo;
          lo.keep_stopping_times = false;
          TwoSidedBm bm(seed, ro, lo);
          bm.right().ensure(m + 1, K);
          const WalkLevel& fine = bm.right().level(m + 1);
          const WalkLevel& coarse = bm.right().level(m);
          const double fdt = std::ldexp(1.0, -2 * static_cast<int>(m + 1));
          const double cdt = std::ldexp(1.0, -2 * static_cast<int>(m));
          double lag = 0;
          for (std::uint64_t k = 1; k <= N; ++k)
            lag = std::max(lag, std::abs(static_cast<double>(fine.stopping_time(k)) * fdt - static_cast<double>(k) * cdt));
          const auto bf = level_values(fine, grid_last_index(K, m + 1));
          const auto bc = level_values(coarse, N + (grid_last_index(K, m + 1) > 4 * N ? 1 : 0));
          std::vector<double> out{lag, max_strided_difference(bf, bc), max_interpolated_difference(bf, bc)};
          if (fbm) {
            bm.left().ensure(m + 1, c.past_horizon);
            const auto pc = fbm_grid_values(bm, m, kernel, K, policy).values;
            const auto pf = fbm_grid_values(bm, m + 1, kernel, K, policy).values;
            out.push_back(max_strided_difference(pf, pc));
            out.push_back(max_interpolated_difference(pf, pc));
          }
          return out;
        },
        c.threads);
  }
  auto column = [&](std::size_t i) {
    std::vector<double> v;
    for (const auto& p : per)
      v.push_back(p[i]);
    return v;
  };
  const std::string trivial = N == 0 ? "K 4^m < 1: the maximum runs over t = 0 only and is zero" : "";
  std::vector<VerificationReport> out;
  out.push_back(exceedance_report("time_lag", c, column(0), time_lag_threshold(K, c.C, m),
                                  power_budget(2, K, m, c.C),
                                  N == 0 ? trivial : "max_k |T_{m+1}(k) 4^-(m+1) - k 4^-m|"));
  out.push_back(exceedance_report("bm_level_difference", c, column(1), bm_difference_threshold(K, m),
                                  power_budget(3, K, m, c.C),
                                  N == 0 ? trivial : "max over the level-m grid of |B_{m+1} - B_m|"));
  if (c.C >= 1.5)
    out.push_back(exceedance_report("bm_limit", c, column(2), bm_difference_threshold(K, m),
                                    power_budget(6, K, m, c.C),
                                    N == 0 ? trivial : "sup over [0,K] of |W - B_m| with W proxied by B_{m+1}"));
  if (fbm) {
    const RateBound rb = level_difference_bound(c.hurst, K);
    const RateBound rc = rb.compounded();
    out.push_back(exceedance_report("fbm_level_difference", c, column(3), rb.threshold(m),
                                    rb.exception_budget(K, m, c.C),
                                    N == 0 ? trivial : "max over the level-m grid of |B^H_{m+1} - B^H_m|"));
    out.back().details.emplace_back("alpha", rb.alpha);
    out.back().details.emplace_back("beta", rb.beta);
    out.push_back(exceedance_report("fbm_limit", c, column(4), rc.threshold(m), rc.exception_budget(K, m, c.C),
                                    N == 0 ? trivial
                                           : "sup over [0,K] of |B^H_{m+j} - B^H_m| with j = 1, compounded alpha"));
    out.back().details.emplace_back("alpha", rc.alpha);
    out.back().details.emplace_back("beta", rc.beta);
  }
  return out;
}

// ---------------------------------------------------------------- rates

std::vector<double> median_level_differences(const RateConfig& c) {
  if (c.m_max < c.m_min)
    throw ConfigError("m_range", "m_max must not be below m_min");
  if (c.replicas < 1)
    throw ConfigError("replicas", "must be at least 1");
  const Kernel kernel(c.hurst);
  const TruncationPolicy policy = make_policy(c.epsilon, c.past_horizon);
  const double K = c.horizon;
  const auto per = run_replicas(
      c.replicas, c.seed,
      [&](std::uint64_t, std::uint64_t seed) {
        HierarchyOptions o;
        o.keep_stopping_times = false;
        TwoSidedBm bm(seed, o, o);
        bm.extend(c.m_max + 1, K, c.past_horizon);
        std::vector<double> out;
        std::vector<double> coarse = fbm_grid_values(bm, c.m_min, kernel, K, policy).values;
        for (unsigned m = c.m_min; m <= c.m_max; ++m) {
          if (m < c.m_max) {
            auto fine = fbm_grid_values(bm, m + 1, kernel, K, policy).values;
            out.push_back(max_strided_difference(fine, coarse));
            coarse = std::move(fine);
          } else {
            // The top level is only needed on the coarse grid.
            const auto fine = fbm_grid_values_every4(bm, m + 1, kernel, K, policy);
            double best = 0;
            for (std::size_t k = 0; k < fine.size(); ++k)
              best = std::max(best, std::abs(fine[k] - coarse[k]));
            out.push_back(best);
          }
        }
        return out;
      },
      c.threads);
  std::vector<double> medians;
  for (unsigned i = 0; i <= c.m_max - c.m_min; ++i) {
    std::vector<double> col;
    for (const auto& p : per)
      col.push_back(p[i]);
    medians.push_back(median(col));
  }
  return medians;
}

VerificationReport fit_convergence_rate(const RateConfig& c) {
  if (c.m_max < c.m_min + 3)
    throw InsufficientDataError("fit_convergence_rate: need at least four consecutive levels");
  const auto med = median_level_differences(c);
  std::vector<double> x, y;
  for (unsigned m = c.m_min; m <= c.m_max; ++m) {
    x.push_back(m);
    y.push_back(std::log2(med[m - c.m_min] / static_cast<double>(std::max(m, 1U))));
  }
  const LinearFit fit = linear_fit(x, y);
  const double beta = beta_exponent(c.hurst);
  VerificationReport r;
  r.check = "convergence_rate";
  r.seed = c.seed;
  r.config = {{"hurst", c.hurst},
              {"m_min", static_cast<std::int64_t>(c.m_min)},
              {"m_max", static_cast<std::int64_t>(c.m_max)},
              {"horizon", c.horizon},
              {"epsilon", c.epsilon},
              {"past_horizon", c.past_horizon}};
  r.replicas = c.replicas;
  r.statistic = fit.slope;
  r.bound = 0.20;
  r.pass = std::abs(fit.slope + beta) <= 0.20;
  r.notes = "slope of log2(median max-difference / m) against m; target -beta(H)";
  r.details = {{"target_slope", -beta}, {"r_squared", fit.r_squared}};
  for (unsigned m = c.m_min; m <= c.m_max; ++m)
    r.details.emplace_back("median_level_" + std::to_string(m), med[m - c.m_min]);
  return r;
}

// ---------------------------------------------------------------- distribution

namespace {

VerificationReport stationarity_report(const DistributionConfig& c, const Kernel& kernel, const TruncationPolicy& policy) {
  const unsigned m = c.coefficient_level;
  const std::uint64_t n = std::uint64_t{1} << (2 * m);
  const std::uint64_t V = path_tail_cutoff(c.horizon, m, kernel, policy);
  double max_diff = 0, max_slack = 0, max_allowed = 0;
  bool ok = true;
  for (std::uint64_t k : {std::uint64_t{1}, std::max<std::uint64_t>(n / 4, 1), n}) {
    for (std::uint64_t j : {std::uint64_t{1}, std::uint64_t{7}, std::max<std::uint64_t>(n / 2, 1)}) {
      const auto wa = moving_average_weights(j + k, m, kernel, V);
      const auto wb = moving_average_weights(j, m, kernel, V);
      const auto wc = moving_average_weights(k, m, kernel, V);
      const auto lo = -static_cast<std::int64_t>(V);
      auto inc = [&](std::int64_t u) { return wa[u] - (u < static_cast<std::int64_t>(j) ? wb[u] : 0.0); };
      double diff = 0, slack2 = 0;
      for (std::int64_t u = lo; u < static_cast<std::int64_t>(j + k); ++u) {
        const std::int64_t up = u - static_cast<std::int64_t>(j);
        if (up >= lo)
          diff = std::max(diff, std::abs(inc(u) - wc[up]));
        else
          slack2 += inc(u) * inc(u);
      }
      const double full = exact_second_moment(k, m, kernel, std::numeric_limits<std::uint64_t>::max());
      const double slack = std::sqrt(slack2 / full);
      const double eps_realized = std::sqrt(tail_second_moment(k, m, kernel, V) / full);
      max_diff = std::max(max_diff, diff);
      max_slack = std::max(max_slack, slack);
      max_allowed = std::max(max_allowed, 2 * eps_realized);
      ok = ok && diff <= 1e-12 && slack <= 2 * eps_realized * (1 + 1e-9) + 1e-15;
    }
  }
  VerificationReport r;
  r.check = "stationary_increments";
  r.seed = c.seed;
  r.config = {{"hurst", c.hurst}, {"level", static_cast<std::int64_t>(m)}, {"past_horizon", c.past_horizon},
              {"epsilon", c.epsilon}};
  r.statistic = max_diff;
  r.bound = 1e-12;
  r.pass = ok;
  r.notes = "coefficients of B(t_j + t_k) - B(t_j) against those of B(t_k), shifted by j";
  r.details = {{"tail_slack", max_slack}, {"tail_slack_allowed", max_allowed}, {"window", static_cast<std::int64_t>(V)}};
  return r;
}

VerificationReport self_similarity_report(const DistributionConfig& c, const Kernel& kernel, const TruncationPolicy& policy) {
  const unsigned m = c.coefficient_level, m0 = c.self_similarity_shift;
  const double a = std::ldexp(1.0, 2 * static_cast<int>(m0));
  const double aH = std::pow(a, -c.hurst);
  double worst = 0;
  for (std::uint64_t k : {1ULL, 3ULL, 16ULL}) {
    const std::uint64_t idx = k << (2 * m0);
    const std::uint64_t V = tail_cutoff(idx, m + m0, kernel, policy);
    const auto lhs = moving_average_weights(idx, m, kernel, V);
    const auto rhs = moving_average_weights(idx, m + m0, kernel, V);
    double scale = 0;
    for (double w : rhs.values)
      scale = std::max(scale, std::abs(w));
    for (std::size_t i = 0; i < lhs.values.size(); ++i)
      worst = std::max(worst, std::abs(aH * lhs.values[i] - rhs.values[i]) / scale);
  }
  VerificationReport r;
  r.check = "self_similarity";
  r.seed = c.seed;
  r.config = {{"hurst", c.hurst}, {"level", static_cast<std::int64_t>(m)},
              {"shift", static_cast<std::int64_t>(m0)}, {"past_horizon", c.past_horizon}};
  r.statistic = worst;
  r.bound = 1e-12;
  r.pass = worst <= 1e-12;
  r.notes = "a^-H times the level-m coefficients of B(a t_k) against the level-(m+m0) coefficients, a = 4^m0";
  return r;
}

} // namespace

std::vector<VerificationReport> check_distributional_properties(const DistributionConfig& c) {
  if (!(c.horizon >= 1))
    throw ConfigError("horizon", "the distribution checks sample t = 1 and need horizon >= 1");
  if (c.replicas < 2)
    throw ConfigError("replicas", "at least two replicas are required");
  const Kernel kernel(c.hurst);
  const TruncationPolicy policy = make_policy(c.epsilon, c.past_horizon);
  std::vector<VerificationReport> out;
  out.push_back(stationarity_report(c, kernel, policy));
  out.push_back(self_similarity_report(c, kernel, policy));

  const unsigned m = c.level;
  const std::uint64_t n = std::uint64_t{1} << (2 * m);
  const std::vector<double> times{0.25, 0.5, 1.0};
  std::vector<MovingAverageWeights> weights;
  std::uint64_t left_needed = 0;
  for (double t : times) {
    const auto k = static_cast<std::uint64_t>(std::ldexp(t, 2 * static_cast<int>(m)));
    weights.push_back(moving_average_weights(k, m, kernel, policy));
    left_needed = std::max(left_needed, weights.back().tail_cutoff);
  }
  const double left_h = std::ldexp(static_cast<double>(left_needed), -2 * static_cast<int>(m));
  const auto per = run_replicas(
      c.replicas, c.seed,
      [&](std::uint64_t, std::uint64_t seed) {
        HierarchyOptions o;
        o.keep_stopping_times = false;
        TwoSidedBm bm(seed, o, o);
        bm.extend(m, 1.0, left_h);
        std::vector<double> v;
        for (const auto& w : weights)
          v.push_back(fbm_value(bm, m, w));
        return v;
      },
      c.threads);
  std::vector<std::vector<double>> cols(times.size());
  for (const auto& p : per)
    for (std::size_t i = 0; i < times.size(); ++i)
      cols[i].push_back(p[i]);

  const ReportFields fields{{"hurst", c.hurst},     {"level", static_cast<std::int64_t>(m)},
                            {"epsilon", c.epsilon}, {"past_horizon", c.past_horizon}};
  const std::uint64_t V1 = weights[2].tail_cutoff;
  const double var1 = exact_second_moment(n, m, kernel, V1);
  const KsResult ks = ks_test_normal(cols[2], var1);
  VerificationReport r;
  r.check = "normality";
  r.seed = c.seed;
  r.config = fields;
  r.replicas = c.replicas;
  r.statistic = ks.p_value;
  r.bound = 0.01;
  r.pass = ks.p_value >= 0.01;
  r.notes = "Kolmogorov-Smirnov test of B_m^H(1) against N(0, exact second moment of the same window)";
  r.details = {{"ks_statistic", ks.statistic}, {"variance", var1}, {"window", static_cast<std::int64_t>(V1)}};
  out.push_back(r);

  const NormalizationConstant vh = variance_constant(c.hurst);
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}, {1, 2}, {2, 2}};
  for (const auto& [i, j] : pairs) {
    const CovarianceEstimate est = sample_covariance(cols[i], cols[j]);
    const double oracle = fbm_covariance(times[i], times[j], vh);
    VerificationReport cr;
    cr.check = "covariance";
    cr.seed = c.seed;
    cr.config = fields;
    cr.config.emplace_back("s", times[i]);
    cr.config.emplace_back("t", times[j]);
    cr.replicas = c.replicas;
    cr.statistic = est.standard_error > 0 ? std::abs(est.value - oracle) / est.standard_error
                                          : std::numeric_limits<double>::infinity();
    cr.bound = 3;
    cr.pass = cr.statistic <= 3;
    cr.notes = "|empirical - fBM covariance| in standard errors";
    cr.details = {{"empirical", est.value}, {"standard_error", est.standard_error}, {"oracle", oracle}};
    if (weights[i].tail_cutoff == weights[j].tail_cutoff) {
      const auto ki = static_cast<std::uint64_t>(std::ldexp(times[i], 2 * static_cast<int>(m)));
      const auto kj = static_cast<std::uint64_t>(std::ldexp(times[j], 2 * static_cast<int>(m)));
      cr.details.emplace_back("windowed_exact", exact_covariance(ki, kj, m, kernel, weights[i].tail_cutoff));
    }
    out.push_back(cr);
  }
  return out;
}

// ---------------------------------------------------------------- delta truncation

namespace {

struct DeltaGrid {
  std::int64_t k;  ///< t_(m) / dt
  std::int64_t d;  ///< delta_(m) / dt
  std::int64_t V;  ///< -(-1/delta)_(m) / dt
  double dt;
};

DeltaGrid delta_grid(unsigned m, double t, double delta) {
  if (!(delta > 0 && delta <= t))
    throw DomainError("delta must lie in (0, t]");
  DeltaGrid g;
  const double n = std::ldexp(1.0, 2 * static_cast<int>(m));
  g.dt = 1 / n;
  g.k = static_cast<std::int64_t>(std::floor(t * n));
  g.d = static_cast<std::int64_t>(std::floor(delta * n));
  g.V = static_cast<std::int64_t>(std::ceil(n / delta));
  if (g.d == 0)
    throw DomainError("delta is below the level-m grid spacing");
  return g;
}

} // namespace

DeltaTruncationTerms delta_truncation_terms(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double t, double delta) {
  const DeltaGrid g = delta_grid(m, t, delta);
  const double tk = static_cast<double>(g.k) * g.dt;
  auto coeff = [&](std::int64_t r) {
    const double tr = static_cast<double>(r) * g.dt;
    return kernel_h(tr - g.dt, tk, kernel) - kernel_h(tr, tk, kernel);
  };
  auto B = [&](std::int64_t r) { return bm.grid_value(m, r); };
  DeltaTruncationTerms out;
  for (std::int64_t r = g.k - g.d + 1; r <= g.k; ++r)
    out.E += coeff(r) * B(r);
  out.E -= kernel.norm() * kernel.power(static_cast<double>(g.d) * g.dt) * B(g.k - g.d + 1);
  for (std::int64_t r = -g.d + 1; r <= 0; ++r)
    out.F += coeff(r) * B(r);
  out.G = -kernel_h(-static_cast<double>(g.V) * g.dt, tk, kernel) * B(-g.V);
  return out;
}

double delta_truncation_direct(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double t, double delta) {
  const DeltaGrid g = delta_grid(m, t, delta);
  const double tk = static_cast<double>(g.k) * g.dt;
  auto coeff = [&](std::int64_t r) {
    const double tr = static_cast<double>(r) * g.dt;
    return kernel_h(tr - g.dt, tk, kernel) - kernel_h(tr, tk, kernel);
  };
  const double full = fbm_value_by_parts(bm, m, kernel, static_cast<std::uint64_t>(g.k), static_cast<std::uint64_t>(g.V));
  double windowed = 0;
  for (std::int64_t r = -g.V + 1; r <= -g.d; ++r)
    windowed += coeff(r) * bm.grid_value(m, r);
  for (std::int64_t r = 1; r <= g.k - g.d; ++r)
    windowed += coeff(r) * bm.grid_value(m, r);
  const double singular = kernel.norm() * kernel.power(static_cast<double>(g.d) * g.dt) * bm.grid_value(m, g.k - g.d + 1);
  return full - windowed - singular;
}

DeltaTruncationVariances delta_truncation_variance_bounds(double hurst, double t, double delta) {
  const double H = hurst, a = H - 0.5;
  DeltaTruncationVariances v;
  v.E = std::pow(delta, 2 * H) / (2 * H);
  v.F = 3.5 * std::pow(t, 2 * H - 1) * delta + 3 / (2 * H) * std::pow(delta, 2 * H);
  v.G = 1.5 * a * a / (1 - H) * t * t * std::pow(delta, 2 - 2 * H);
  return v;
}

double delta_truncation_budget(double hurst, double t, double delta, double C) {
  const DeltaTruncationVariances v = delta_truncation_variance_bounds(hurst, t, delta);
  return std::sqrt(2 * C * log_star(1 / delta)) * std::sqrt(v.E + v.F + v.G) / std::tgamma(hurst + 0.5);
}

VerificationReport check_delta_truncation(const DeltaTruncationConfig& c) {
  if (!(c.delta > 0 && c.delta <= c.t))
    throw DomainError("delta must lie in (0, t]");
  if (c.replicas < 1)
    throw ConfigError("replicas", "must be at least 1");
  const Kernel kernel(c.hurst);
  const unsigned m = c.level;
  const auto per = run_replicas(
      c.replicas, c.seed,
      [&](std::uint64_t, std::uint64_t seed) {
        HierarchyOptions o;
        o.keep_stopping_times = false;
        TwoSidedBm bm(seed, o, o);
        bm.extend(m, c.t, std::ceil(1 / c.delta) + 1);
        const DeltaTruncationTerms terms = delta_truncation_terms(bm, m, kernel, c.t, c.delta);
        return std::vector<double>{std::abs(terms.total()), terms.E, terms.F, terms.G};
      },
      c.threads);
  std::vector<double> absval, E, F, G;
  for (const auto& p : per) {
    absval.push_back(p[0]);
    E.push_back(p[1]);
    F.push_back(p[2]);
    G.push_back(p[3]);
  }
  auto rms = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v)
      s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const DeltaTruncationVariances vb = delta_truncation_variance_bounds(c.hurst, c.t, c.delta);
  const double g = std::tgamma(c.hurst + 0.5);
  VerificationReport r;
  r.check = "delta_truncation";
  r.seed = c.seed;
  r.config = {{"hurst", c.hurst}, {"t", c.t}, {"delta", c.delta}, {"level", static_cast<std::int64_t>(m)},
              {"C", c.C}, {"percentile", c.percentile}};
  r.replicas = c.replicas;
  r.statistic = quantile(absval, c.percentile);
  r.bound = delta_truncation_budget(c.hurst, c.t, c.delta, c.C);
  r.pass = r.statistic < r.bound;
  r.notes = "percentile of |B^H - B^(H,delta) - singular term|; budget sums the three variance bounds";
  r.details = {{"rms_E", rms(E)},
               {"rms_F", rms(F)},
               {"rms_G", rms(G)},
               {"sd_bound_E", std::sqrt(vb.E) / g},
               {"sd_bound_F", std::sqrt(vb.F) / g},
               {"sd_bound_G", std::sqrt(vb.G) / g}};
  return r;
}

// ---------------------------------------------------------------- Hurst estimate

HurstEstimate estimate_hurst(const std::vector<double>& values, std::uint64_t min_lag) {
  if (values.size() < 1024)
    throw InsufficientDataError("estimate_hurst: need at least 1024 grid points, got " + std::to_string(values.size()));
  if (min_lag == 0)
    throw DomainError("estimate_hurst: min_lag must be positive");
  const std::uint64_t n = values.size() - 1;
  HurstEstimate est;
  std::vector<double> x, y;
  for (std::uint64_t lag = min_lag; lag <= n / 8; lag *= 2) {
    double s = 0;
    for (std::uint64_t i = 0; i + lag <= n; ++i) {
      const double d = values[i + lag] - values[i];
      s += d * d;
    }
    const double msd = s / static_cast<double>(n - lag + 1);
    est.lags.push_back(lag);
    est.mean_square.push_back(msd);
    if (msd == 0)
      est.degenerate = true;
    x.push_back(std::log2(static_cast<double>(lag)));
    y.push_back(msd > 0 ? std::log2(msd) : 0.0);
  }
  if (x.size() < 2)
    throw InsufficientDataError("estimate_hurst: fewer than two usable lags");
  if (est.degenerate) {
    est.hurst = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.hurst = linear_fit(x, y).slope / 2;
  return est;
}

} // namespace rwfbm
