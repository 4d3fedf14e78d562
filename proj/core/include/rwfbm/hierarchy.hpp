// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rwfbm/step_source.hpp"
#include "rwfbm/walk_level.hpp"

namespace rwfbm {

/// Shrunken walk B_m(t) = 2^-m S~_m(t 4^m), linear between grid points.
/// A view; the level must outlive it.
class BmApprox {
public:
  explicit BmApprox(const WalkLevel& level) : level_(&level) {}

  unsigned level() const noexcept { return level_->level(); }
  double spacing() const noexcept;
  std::uint64_t grid_size() const noexcept { return level_->size(); } ///< last valid index
  double horizon() const noexcept { return static_cast<double>(grid_size()) * spacing(); }

  double grid_value(std::uint64_t k) const;
  /// Throws DomainError for t < 0 and OutOfHorizonError past the generated steps.
  double evaluate(double t) const;

private:
  const WalkLevel* level_;
};

struct HierarchyOptions {
  /// Stopping times are needed by the lag and refinement checks; dropping them saves memory.
  bool keep_stopping_times = true;
  /// Raw-step budget per level as a multiple of the expected requirement.
  double cap_factor = 64.0;
  std::uint64_t max_steps_per_level = (std::uint64_t{1} << 32) - 64;
};

/// Nested twisted walks for one half-axis.
class Hierarchy {
public:
  Hierarchy(std::shared_ptr<const RawSteps> source, Side side, HierarchyOptions options = {});

  /// Extends levels 0..top so level j holds at least ceil(horizon 4^j) twisted
  /// steps and ceil(horizon 4^(j-1)) twisted bridges. Existing values never change.
  void ensure(unsigned top, double horizon);

  Side side() const noexcept { return side_; }
  unsigned levels() const noexcept { return static_cast<unsigned>(levels_.size()); }
  const WalkLevel& level(unsigned j) const;
  BmApprox bm(unsigned j) const { return BmApprox(level(j)); }
  /// Time covered by level j.
  double horizon(unsigned j) const;
  const RawSteps& source() const noexcept { return *source_; }

private:
  friend void corrupt_twisted_step(Hierarchy&, unsigned, std::uint64_t);

  WalkLevel& grow_to(unsigned j);
  void ensure_steps(unsigned j, std::uint64_t n);
  void ensure_bridges(unsigned j, std::uint64_t b);
  void generate_raw(unsigned j, std::uint64_t count, std::uint64_t expected);

  std::shared_ptr<const RawSteps> source_;
  Side side_;
  HierarchyOptions options_;
  std::vector<std::unique_ptr<WalkLevel>> levels_;
};

/// Right and left hierarchies presenting one two-sided B_m with B_m(-u) := B_m^left(u).
class TwoSidedBm {
public:
  explicit TwoSidedBm(std::uint64_t master_seed, HierarchyOptions right = {},
                      HierarchyOptions left = {});
  TwoSidedBm(std::shared_ptr<const RawSteps> source, HierarchyOptions right = {},
             HierarchyOptions left = {});

  void extend(unsigned m, double right_horizon, double left_horizon);

  const Hierarchy& right() const noexcept { return right_; }
  const Hierarchy& left() const noexcept { return left_; }
  Hierarchy& right() noexcept { return right_; }
  Hierarchy& left() noexcept { return left_; }
  std::uint64_t master_seed() const { return source_->master_seed(); }

  /// B_m(r 4^-m) for any integer r.
  double grid_value(unsigned m, std::int64_t r) const;
  double evaluate(unsigned m, double t) const;
  /// Increment B_m(t_{r+1}) - B_m(t_r) scaled by 2^m: X~_m(r+1) for r >= 0,
  /// minus the left step X~^left_m(-r) for r < 0.
  int increment(unsigned m, std::int64_t r) const;

private:
  std::shared_ptr<const RawSteps> source_;
  Hierarchy right_;
  Hierarchy left_;
};

/// Both hierarchies through level m over [-K, K].
void extend_two_sided(TwoSidedBm& bm, unsigned m, double K);

} // namespace rwfbm
