// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/walk_level.hpp"

#include <array>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "rwfbm/error.hpp"

namespace rwfbm {

std::vector<long long> partial_sums(const std::vector<int>& steps) {
  std::vector<long long> s(steps.size() + 1, 0);
  for (std::size_t n = 0; n < steps.size(); ++n)
    s[n + 1] = s[n] + steps[n];
  return s;
}

StoppingTimes compute_stopping_times(const std::vector<long long>& sums) {
  StoppingTimes out;
  out.times.push_back(0);
  if (sums.empty())
    return out;
  long long anchor = sums[0];
  for (std::size_t n = 1; n < sums.size(); ++n) {
    if (std::llabs(sums[n] - anchor) == 2) {
      out.times.push_back(n);
      anchor = sums[n];
    }
  }
  out.found = out.times.size() - 1;
  return out;
}

std::vector<int> twist_level(const std::vector<int>& prev_twisted, const std::vector<int>& raw) {
  const auto st = compute_stopping_times(partial_sums(raw));
  if (st.found > prev_twisted.size())
    throw InsufficientPreviousLevelError("twist_level: " + std::to_string(st.found) +
                                         " bridges but only " +
                                         std::to_string(prev_twisted.size()) +
                                         " coarser steps");
  std::vector<int> out(raw);
  for (std::size_t k = 1; k <= st.found; ++k) {
    long long d = 0;
    for (std::size_t n = st.times[k - 1]; n < st.times[k]; ++n)
      d += raw[n];
    if ((d > 0 ? 1 : -1) != prev_twisted[k - 1])
      for (std::size_t n = st.times[k - 1]; n < st.times[k]; ++n)
        out[n] = -raw[n];
  }
  return out;
}

namespace {

struct ScanEntry {
  std::uint8_t hits;
  std::uint8_t pos[4];
  std::int8_t sign[4];
  std::int8_t final_state;
};

// Indexed by [state + 1][byte]; bit i of the byte is the (i+1)-th step.
using ScanTable = std::array<std::array<ScanEntry, 256>, 3>;

ScanTable make_scan_table() {
  ScanTable t{};
  for (int s = -1; s <= 1; ++s) {
    for (int b = 0; b < 256; ++b) {
      ScanEntry e{};
      int d = s;
      for (int i = 0; i < 8; ++i) {
        d += ((b >> i) & 1) ? 1 : -1;
        if (d == 2 || d == -2) {
          e.pos[e.hits] = static_cast<std::uint8_t>(i);
          e.sign[e.hits] = static_cast<std::int8_t>(d / 2);
          ++e.hits;
          d = 0;
        }
      }
      e.final_state = static_cast<std::int8_t>(d);
      t[s + 1][b] = e;
    }
  }
  return t;
}

const ScanTable& scan_table() {
  static const ScanTable table = make_scan_table();
  return table;
}

} // namespace

std::uint64_t WalkLevel::stopping_time(std::uint64_t k) const {
  if (!keep_times_)
    throw Error("WalkLevel: stopping times were not kept for level " + std::to_string(level_));
  if (k > twisted_bridges_)
    throw OutOfHorizonError("WalkLevel: stopping time " + std::to_string(k) + " beyond " +
                            std::to_string(twisted_bridges_) + " twisted bridges at level " +
                            std::to_string(level_));
  return k == 0 ? 0 : times_[k - 1];
}

void WalkLevel::append_raw(const RawSteps& src, Side side, std::uint64_t count) {
  const std::uint64_t from = raw_len_;
  const std::uint64_t to = from + count;
  bits_.resize((to + 63) / 64, 0);
  std::uint64_t w = from >> 6;
  for (; (w << 6) < to; ++w) {
    std::uint64_t word = src.word(side, level_, w);
    const std::uint64_t lo = std::max(from, w << 6) - (w << 6);
    const std::uint64_t hi = std::min(to, (w + 1) << 6) - (w << 6);
    std::uint64_t mask = hi - lo == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (hi - lo)) - 1) << lo;
    bits_[w] = (bits_[w] & ~mask) | (word & mask);
  }
  raw_len_ = to;
  if (level_ == 0) {
    twisted_len_ = raw_len_;
    rebuild_prefix(from >> 6);
  } else {
    scan(from, to);
  }
}

void WalkLevel::scan(std::uint64_t from, std::uint64_t to) {
  if (to > std::numeric_limits<std::uint32_t>::max())
    throw ResourceLimitError("WalkLevel: stopping time exceeds 32-bit storage at level " +
                             std::to_string(level_));
  const auto& table = scan_table();
  // Blocks of 4096 bytes; each byte may write four entries before the count advances.
  constexpr std::uint64_t block = 4096 * 8;
  std::size_t n = times_.size();
  // Mean bridge length is 4.
  const std::size_t expect = n + (to - from) / 4 + (to - from) / 32 + block;
  times_.reserve(expect);
  signs_.reserve(expect);
  std::uint32_t* tp = nullptr;
  std::int8_t* sp = nullptr;
  auto reserve_block = [&]() {
    const std::size_t need = n + block / 2 + 8;
    if (times_.size() < need) {
      const std::size_t grown = std::max(need, std::min(times_.capacity(), need + block));
      times_.resize(grown);
      signs_.resize(grown);
    }
    tp = times_.data();
    sp = signs_.data();
  };
  reserve_block();
  std::uint64_t i = from;
  auto single = [&](std::uint64_t idx) {
    scan_state_ += ((bits_[idx >> 6] >> (idx & 63)) & 1U) ? 1 : -1;
    if (scan_state_ == 2 || scan_state_ == -2) {
      tp[n] = static_cast<std::uint32_t>(idx + 1);
      sp[n] = static_cast<std::int8_t>(scan_state_ / 2);
      ++n;
      scan_state_ = 0;
    }
  };
  while (i < to && (i & 7) != 0)
    single(i++);
  for (; i + 8 <= to; i += 8) {
    if ((i & (block - 1)) == 0)
      reserve_block();
    const auto byte = static_cast<unsigned>((bits_[i >> 6] >> (i & 63)) & 0xff);
    const ScanEntry& e = table[scan_state_ + 1][byte];
    const auto t0 = static_cast<std::uint32_t>(i + 1);
    for (unsigned h = 0; h < 4; ++h) {
      tp[n + h] = t0 + e.pos[h];
      sp[n + h] = e.sign[h];
    }
    n += e.hits;
    scan_state_ = e.final_state;
  }
  while (i < to)
    single(i++);
  times_.resize(n);
  signs_.resize(n);
  found_ = base_ + n;
}

void WalkLevel::twist_through(std::uint64_t b, const WalkLevel& prev) {
  if (b > found_)
    throw Error("WalkLevel: twisting past the last found bridge");
  if (b > prev.size())
    throw InsufficientPreviousLevelError("WalkLevel: level " + std::to_string(level_) + " needs " +
                                         std::to_string(b) + " coarser steps, level " +
                                         std::to_string(prev.level()) + " has " +
                                         std::to_string(prev.size()));
  if (b <= twisted_bridges_)
    return;
  const std::uint64_t old_len = twisted_len_;
  const std::uint64_t new_len = found_time(b);
  // Mark where the flip state changes, then prefix-xor the marks into a mask.
  const std::uint64_t w0 = old_len >> 6;
  std::vector<std::uint64_t> toggles(((new_len + 63) >> 6) - w0 + 1, 0);
  bool state = false;
  for (std::uint64_t k = twisted_bridges_ + 1; k <= b; ++k) {
    const bool flip = signs_[k - base_ - 1] != prev.twisted_step(k);
    const std::uint64_t start = k == 1 ? 0 : found_time(k - 1);
    toggles[(start >> 6) - w0] ^= static_cast<std::uint64_t>(flip != state) << (start & 63);
    state = flip;
  }
  std::uint64_t carry = 0;
  for (std::uint64_t w = w0; (w << 6) < new_len; ++w) {
    std::uint64_t x = toggles[w - w0];
    x ^= x << 1;
    x ^= x << 2;
    x ^= x << 4;
    x ^= x << 8;
    x ^= x << 16;
    x ^= x << 32;
    x ^= carry;
    carry = (x >> 63) ? ~std::uint64_t{0} : 0;
    if (((w + 1) << 6) > new_len)
      x &= (std::uint64_t{1} << (new_len & 63)) - 1;
    bits_[w] ^= x;
  }
  twisted_len_ = new_len;
  twisted_bridges_ = b;
  if (!keep_times_ && twisted_bridges_ - base_ > (1U << 16) && twisted_bridges_ - base_ > times_.size() / 2) {
    // Keep T(twisted) so the next bridge start stays addressable.
    const std::uint64_t drop = twisted_bridges_ - base_ - 1;
    times_.erase(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(drop));
    signs_.erase(signs_.begin(), signs_.begin() + static_cast<std::ptrdiff_t>(drop));
    base_ += drop;
  }
  rebuild_prefix(old_len >> 6);
}

void WalkLevel::rebuild_prefix(std::uint64_t from_word) {
  const std::uint64_t full = twisted_len_ >> 6;
  prefix_.resize(full + 1);
  for (std::uint64_t w = from_word; w < full; ++w)
    prefix_[w + 1] = prefix_[w] + 2 * static_cast<std::int64_t>(std::popcount(bits_[w])) - 64;
}

} // namespace rwfbm
