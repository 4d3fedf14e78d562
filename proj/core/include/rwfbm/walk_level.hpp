// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rwfbm/step_source.hpp"

namespace rwfbm {

// Plain-vector forms of the per-level operations. The packed hierarchy below
// does the same work incrementally; these are kept as readable references.

struct StoppingTimes {
  std::vector<std::size_t> times; ///< times[0] == 0
  std::size_t found = 0;          ///< == times.size() - 1
};

std::vector<long long> partial_sums(const std::vector<int>& steps);

/// T(k+1) = first n > T(k) with |S(n) - S(T(k))| == 2. `sums[0]` must be 0.
StoppingTimes compute_stopping_times(const std::vector<long long>& sums);

/// Flips whole bridges of `raw` so bridge k moves by 2 * prev_twisted[k-1].
/// A trailing incomplete bridge is returned unchanged.
std::vector<int> twist_level(const std::vector<int>& prev_twisted, const std::vector<int>& raw);

class Hierarchy;

/// One row of the lattice: packed twisted steps, partial sums and stopping times.
///
/// Steps are 1-based as in X(n), n >= 1. Positions below size() hold twisted
/// steps; generated raw steps beyond it are still waiting for their bridge to
/// be twisted and are not exposed.
class WalkLevel {
public:
  explicit WalkLevel(unsigned level) : level_(level) {}

  unsigned level() const noexcept { return level_; }
  std::uint64_t size() const noexcept { return twisted_len_; }
  std::uint64_t raw_generated() const noexcept { return raw_len_; }

  int twisted_step(std::uint64_t n) const noexcept {
    const std::uint64_t i = n - 1;
    return ((bits_[i >> 6] >> (i & 63)) & 1U) ? 1 : -1;
  }

  /// S~(n) for 0 <= n <= size().
  std::int64_t partial_sum(std::uint64_t n) const noexcept {
    const std::uint64_t w = n >> 6;
    const unsigned r = static_cast<unsigned>(n & 63);
    if (r == 0)
      return prefix_[w];
    const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
    return prefix_[w] + 2 * static_cast<std::int64_t>(std::popcount(bits_[w] & mask)) - r;
  }

  /// Number of bridges whose steps are twisted (0 at level 0).
  std::uint64_t bridges() const noexcept { return twisted_bridges_; }
  bool has_stopping_times() const noexcept { return keep_times_; }
  /// T(k) for 0 <= k <= bridges(); requires has_stopping_times().
  std::uint64_t stopping_time(std::uint64_t k) const;

  const std::vector<std::uint64_t>& packed() const noexcept { return bits_; }

private:
  friend class Hierarchy;
  friend void corrupt_twisted_step(Hierarchy&, unsigned, std::uint64_t);

  void append_raw(const RawSteps& src, Side side, std::uint64_t count);
  void scan(std::uint64_t from, std::uint64_t to);
  /// Twists bridges up to `b`; `prev` must hold at least `b` twisted steps.
  void twist_through(std::uint64_t b, const WalkLevel& prev);
  void rebuild_prefix(std::uint64_t from_word);
  std::uint64_t found_time(std::uint64_t k) const { return times_[k - base_ - 1]; }

  unsigned level_;
  std::vector<std::uint64_t> bits_;
  std::vector<std::int64_t> prefix_{0};
  std::uint64_t raw_len_ = 0;
  std::uint64_t twisted_len_ = 0;
  int scan_state_ = 0;
  std::uint64_t found_ = 0;
  std::uint64_t twisted_bridges_ = 0;
  // T(k) and raw bridge sign for base_ < k <= found_.
  std::vector<std::uint32_t> times_;
  std::vector<std::int8_t> signs_;
  std::uint64_t base_ = 0;
  bool keep_times_ = true;
};

} // namespace rwfbm
