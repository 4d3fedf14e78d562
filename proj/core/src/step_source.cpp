// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/step_source.hpp"

#include <stdexcept>

namespace rwfbm {

const char* to_string(Side side) noexcept { return side == Side::right ? "right" : "left"; }

std::uint64_t derive_subseed(std::uint64_t master_seed, Side side, unsigned level) noexcept {
  std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h + 0x9e3779b97f4a7c15ULL * (1 + static_cast<std::uint64_t>(side)));
  h = mix64(h ^ (0xbb67ae8584caa73bULL + static_cast<std::uint64_t>(level)));
  return h;
}

StepSource::StepSource(std::uint64_t master_seed, Side side, unsigned level) noexcept
    : master_(master_seed), side_(side), level_(level),
      subseed_(derive_subseed(master_seed, side, level)) {}

std::vector<int> generate_level_steps(const StepSource& source, std::size_t count) {
  if (count == 0)
    throw std::invalid_argument("generate_level_steps: count must be positive");
  std::vector<int> out(count);
  std::uint64_t w = 0;
  for (std::size_t n = 0; n < count; ++n) {
    if ((n & 63) == 0)
      w = source.word(n >> 6);
    out[n] = ((w >> (n & 63)) & 1U) ? 1 : -1;
  }
  return out;
}

std::uint64_t SeededRawSteps::word(Side side, unsigned level, std::uint64_t w) const {
  // Constructing a StepSource per word is cheap but the subseed hash is not free.
  thread_local std::uint64_t cached_master = 0;
  thread_local Side cached_side = Side::right;
  thread_local unsigned cached_level = ~0U;
  thread_local std::uint64_t cached_subseed = 0;
  if (cached_level != level || cached_side != side || cached_master != master_) {
    cached_master = master_;
    cached_side = side;
    cached_level = level;
    cached_subseed = derive_subseed(master_, side, level);
  }
  return mix64(cached_subseed + (w + 1) * 0x9e3779b97f4a7c15ULL);
}

void FixtureRawSteps::set(Side side, unsigned level, const std::vector<int>& steps) {
  std::vector<std::uint64_t> words((steps.size() + 63) / 64, 0);
  for (std::size_t n = 0; n < steps.size(); ++n) {
    if (steps[n] != 1 && steps[n] != -1)
      throw std::invalid_argument("FixtureRawSteps: steps must be +1 or -1");
    if (steps[n] == 1)
      words[n >> 6] |= std::uint64_t{1} << (n & 63);
  }
  words_[{side, level}] = std::move(words);
  sizes_[{side, level}] = steps.size();
}

std::uint64_t FixtureRawSteps::word(Side side, unsigned level, std::uint64_t w) const {
  auto it = words_.find({side, level});
  if (it == words_.end() || w >= it->second.size())
    return 0;
  return it->second[w];
}

std::uint64_t FixtureRawSteps::available(Side side, unsigned level) const {
  auto it = sizes_.find({side, level});
  return it == sizes_.end() ? 0 : it->second;
}

} // namespace rwfbm
