// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace rwfbm {

enum class Side : std::uint8_t { right = 0, left = 1 };

const char* to_string(Side side) noexcept;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_subseed(std::uint64_t master_seed, Side side, unsigned level) noexcept;

/// Counter-based stream of fair +-1 steps for one (seed, side, level) row.
/// Step n (0-based) is bit n%64 of word n/64; a set bit means +1.
class StepSource {
public:
  StepSource(std::uint64_t master_seed, Side side, unsigned level) noexcept;

  std::uint64_t word(std::uint64_t w) const noexcept {
    return mix64(subseed_ + (w + 1) * 0x9e3779b97f4a7c15ULL);
  }
  int step(std::uint64_t index) const noexcept {
    return ((word(index >> 6) >> (index & 63)) & 1U) ? 1 : -1;
  }

  std::uint64_t master_seed() const noexcept { return master_; }
  Side side() const noexcept { return side_; }
  unsigned level() const noexcept { return level_; }
  std::uint64_t subseed() const noexcept { return subseed_; }

private:
  std::uint64_t master_;
  Side side_;
  unsigned level_;
  std::uint64_t subseed_;
};

/// Steps 1..count of a row as +-1 values. Throws std::invalid_argument for count == 0.
std::vector<int> generate_level_steps(const StepSource& source, std::size_t count);

/// Raw material for a hierarchy: packed raw steps per (side, level).
class RawSteps {
public:
  static constexpr std::uint64_t unlimited = std::numeric_limits<std::uint64_t>::max();

  virtual ~RawSteps() = default;
  virtual std::uint64_t word(Side side, unsigned level, std::uint64_t w) const = 0;
  /// Number of raw steps that exist for the row.
  virtual std::uint64_t available(Side, unsigned) const { return unlimited; }
  virtual std::uint64_t master_seed() const { return 0; }
};

class SeededRawSteps final : public RawSteps {
public:
  explicit SeededRawSteps(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t word(Side side, unsigned level, std::uint64_t w) const override;
  std::uint64_t master_seed() const override { return master_; }

private:
  std::uint64_t master_;
};

/// Explicit finite step lists, for hand-made fixtures.
class FixtureRawSteps final : public RawSteps {
public:
  void set(Side side, unsigned level, const std::vector<int>& steps);

  std::uint64_t word(Side side, unsigned level, std::uint64_t w) const override;
  std::uint64_t available(Side side, unsigned level) const override;

private:
  std::map<std::pair<Side, unsigned>, std::vector<std::uint64_t>> words_;
  std::map<std::pair<Side, unsigned>, std::uint64_t> sizes_;
};

} // namespace rwfbm
