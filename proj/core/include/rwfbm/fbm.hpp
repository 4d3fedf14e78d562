// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "rwfbm/hierarchy.hpp"
#include "rwfbm/kernel.hpp"

namespace rwfbm {

/// B_m^H on the grid t_k = k 4^-m, 0 <= k <= floor(K 4^m).
struct FbmLevelPath {
  unsigned level = 0;
  double hurst = 0.5;
  double horizon = 0;
  std::vector<double> values;
  TruncationPolicy policy;
  std::uint64_t tail_cutoff_used = 0;

  double spacing() const;
  std::uint64_t last_index() const { return values.empty() ? 0 : values.size() - 1; }
};

enum class GridMethod { automatic, fft, direct };

/// Last grid index floor(K 4^m) covered by horizon K.
std::uint64_t grid_last_index(double K, unsigned m);

/// Past window, in steps, used for a path over [0, K].
std::uint64_t path_tail_cutoff(double K, unsigned m, const Kernel& kernel, const TruncationPolicy& policy);

/// Moving-average sums for every grid point. Needs the right hierarchy through
/// [0, K] and the left one through path_tail_cutoff steps at level m.
FbmLevelPath fbm_grid_values(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                             const TruncationPolicy& policy, GridMethod method = GridMethod::automatic);

/// B_m^H(k 4^-(m-1)) for 0 <= k <= floor(K 4^(m-1)): the level-(m-1) grid points of
/// the level-m path, over the same window as fbm_grid_values. Requires m >= 1.
std::vector<double> fbm_grid_values_every4(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                                           const TruncationPolicy& policy);

/// Extends `bm` as required, then computes the grid values.
FbmLevelPath simulate_fbm(TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                          const TruncationPolicy& policy, GridMethod method = GridMethod::automatic);

/// Single value sum_r w(r) X~_m(r+1) for precomputed weights of some index k.
double fbm_value(const TwoSidedBm& bm, unsigned m, const MovingAverageWeights& weights);

/// Summation-by-parts form over the same window:
/// sum_{r=-V+1}^{k} [h(t_{r-1},t_k) - h(t_r,t_k)] B_m(t_r) - h(t_{-V},t_k) B_m(t_{-V}).
double fbm_value_by_parts(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, std::uint64_t k,
                          std::uint64_t cutoff);

/// gamma B(t_{k+1}) + (1 - gamma) B(t_k); DomainError outside [0, K].
double fbm_eval(const FbmLevelPath& path, double t);

} // namespace rwfbm
