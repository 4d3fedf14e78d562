// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rwfbm/error.hpp"
#include "rwfbm/testing.hpp"

namespace rwfbm {

namespace {

std::uint64_t steps_for(double horizon, unsigned j) {
  if (horizon <= 0)
    return 0;
  const double x = std::ceil(std::ldexp(horizon, 2 * static_cast<int>(j)) - 1e-9);
  if (!(x < 1.8e19))
    throw ResourceLimitError("horizon " + std::to_string(horizon) + " too large at level " +
                             std::to_string(j));
  return static_cast<std::uint64_t>(x);
}

} // namespace

double BmApprox::spacing() const noexcept { return std::ldexp(1.0, -2 * static_cast<int>(level())); }

double BmApprox::grid_value(std::uint64_t k) const {
  if (k > level_->size())
    throw OutOfHorizonError("BmApprox: grid index " + std::to_string(k) + " beyond " +
                            std::to_string(level_->size()) + " at level " +
                            std::to_string(level()));
  return std::ldexp(static_cast<double>(level_->partial_sum(k)), -static_cast<int>(level()));
}

double BmApprox::evaluate(double t) const {
  if (!(t >= 0))
    throw DomainError("BmApprox: negative time");
  const double x = std::ldexp(t, 2 * static_cast<int>(level()));
  const double fk = std::floor(x);
  if (fk > static_cast<double>(level_->size()))
    throw OutOfHorizonError("BmApprox: t=" + std::to_string(t) + " beyond generated horizon " +
                            std::to_string(horizon()));
  const auto k = static_cast<std::uint64_t>(fk);
  const double gamma = x - fk;
  if (gamma == 0)
    return grid_value(k);
  if (k + 1 > level_->size())
    throw OutOfHorizonError("BmApprox: t=" + std::to_string(t) + " beyond generated horizon " +
                            std::to_string(horizon()));
  return (1 - gamma) * grid_value(k) + gamma * grid_value(k + 1);
}

Hierarchy::Hierarchy(std::shared_ptr<const RawSteps> source, Side side, HierarchyOptions options)
    : source_(std::move(source)), side_(side), options_(options) {
  if (!source_)
    throw Error("Hierarchy: null step source");
}

const WalkLevel& Hierarchy::level(unsigned j) const {
  if (j >= levels_.size())
    throw OutOfHorizonError("Hierarchy: level " + std::to_string(j) + " not built (" +
                            std::to_string(levels_.size()) + " levels)");
  return *levels_[j];
}

double Hierarchy::horizon(unsigned j) const {
  return std::ldexp(static_cast<double>(level(j).size()), -2 * static_cast<int>(j));
}

WalkLevel& Hierarchy::grow_to(unsigned j) {
  while (levels_.size() <= j) {
    levels_.push_back(std::make_unique<WalkLevel>(static_cast<unsigned>(levels_.size())));
    levels_.back()->keep_times_ = options_.keep_stopping_times;
  }
  return *levels_[j];
}

void Hierarchy::ensure(unsigned top, double horizon) {
  if (!(horizon >= 0))
    throw DomainError("Hierarchy: negative horizon");
  if (horizon == 0) {
    grow_to(top);
    return;
  }
  for (unsigned j = 0; j <= top; ++j) {
    ensure_steps(j, steps_for(horizon, j));
    if (j > 0)
      ensure_bridges(j, steps_for(horizon, j - 1));
  }
}

void Hierarchy::generate_raw(unsigned j, std::uint64_t count, std::uint64_t expected) {
  WalkLevel& L = *levels_[j];
  const std::uint64_t available = source_->available(side_, j);
  if (L.raw_len_ >= available)
    throw OutOfHorizonError(std::string("Hierarchy: raw steps exhausted at level ") +
                            std::to_string(j) + " (" + to_string(side_) + ")");
  const double budget = options_.cap_factor * static_cast<double>(std::max<std::uint64_t>(expected, 4096));
  const std::uint64_t cap = std::min<std::uint64_t>(
      options_.max_steps_per_level, budget >= 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(budget));
  if (L.raw_len_ >= cap)
    throw ResourceLimitError("Hierarchy: level " + std::to_string(j) + " needs more than " +
                             std::to_string(cap) + " raw steps");
  std::uint64_t target = L.raw_len_ + std::max<std::uint64_t>(count, 1);
  if (available == RawSteps::unlimited)
    target = (target + 63) & ~std::uint64_t{63};
  target = std::min({target, available, cap});
  L.append_raw(*source_, side_, target - L.raw_len_);
}

void Hierarchy::ensure_steps(unsigned j, std::uint64_t n) {
  WalkLevel& L = grow_to(j);
  if (L.size() >= n)
    return;
  if (j == 0) {
    while (L.size() < n)
      generate_raw(0, n - L.size(), n);
    return;
  }
  auto last_found = [&L]() -> std::uint64_t { return L.found_ == 0 ? 0 : L.found_time(L.found_); };
  while (last_found() < n) {
    const std::uint64_t deficit = n - last_found();
    generate_raw(j, deficit + deficit / 4 + 256, n);
  }
  // First bridge ending at or after n.
  const auto first = L.times_.begin() + static_cast<std::ptrdiff_t>(L.twisted_bridges_ - L.base_);
  const auto it = std::lower_bound(first, L.times_.end(), n,
                                   [](std::uint32_t t, std::uint64_t v) { return t < v; });
  const std::uint64_t b = L.base_ + 1 + static_cast<std::uint64_t>(it - L.times_.begin());
  ensure_steps(j - 1, b);
  L.twist_through(b, *levels_[j - 1]);
}

void Hierarchy::ensure_bridges(unsigned j, std::uint64_t b) {
  WalkLevel& L = grow_to(j);
  if (L.bridges() >= b)
    return;
  while (L.found_ < b)
    generate_raw(j, 4 * (b - L.found_) + 256, 4 * b);
  ensure_steps(j - 1, b);
  L.twist_through(b, *levels_[j - 1]);
}

void corrupt_twisted_step(Hierarchy& h, unsigned level, std::uint64_t n) {
  if (level >= h.levels_.size())
    throw OutOfHorizonError("corrupt_twisted_step: level not built");
  WalkLevel& L = *h.levels_[level];
  if (n == 0 || n > L.size())
    throw OutOfHorizonError("corrupt_twisted_step: step not generated");
  L.bits_[(n - 1) >> 6] ^= std::uint64_t{1} << ((n - 1) & 63);
  L.rebuild_prefix((n - 1) >> 6);
}

TwoSidedBm::TwoSidedBm(std::uint64_t master_seed, HierarchyOptions right, HierarchyOptions left)
    : TwoSidedBm(std::make_shared<SeededRawSteps>(master_seed), right, left) {}

TwoSidedBm::TwoSidedBm(std::shared_ptr<const RawSteps> source, HierarchyOptions right,
                       HierarchyOptions left)
    : source_(source), right_(source, Side::right, right), left_(source, Side::left, left) {}

void TwoSidedBm::extend(unsigned m, double right_horizon, double left_horizon) {
  right_.ensure(m, right_horizon);
  left_.ensure(m, left_horizon);
}

double TwoSidedBm::grid_value(unsigned m, std::int64_t r) const {
  if (r >= 0)
    return right_.bm(m).grid_value(static_cast<std::uint64_t>(r));
  return left_.bm(m).grid_value(static_cast<std::uint64_t>(-r));
}

double TwoSidedBm::evaluate(unsigned m, double t) const {
  return t >= 0 ? right_.bm(m).evaluate(t) : left_.bm(m).evaluate(-t);
}

int TwoSidedBm::increment(unsigned m, std::int64_t r) const {
  if (r >= 0) {
    const WalkLevel& L = right_.level(m);
    const auto n = static_cast<std::uint64_t>(r) + 1;
    if (n > L.size())
      throw OutOfHorizonError("TwoSidedBm: right step " + std::to_string(n) + " not generated at level " +
                              std::to_string(m));
    return L.twisted_step(n);
  }
  const WalkLevel& L = left_.level(m);
  const auto n = static_cast<std::uint64_t>(-r);
  if (n > L.size())
    throw OutOfHorizonError("TwoSidedBm: left step " + std::to_string(n) + " not generated at level " +
                            std::to_string(m));
  return -L.twisted_step(n);
}

void extend_two_sided(TwoSidedBm& bm, unsigned m, double K) {
  if (!(K > 0))
    throw DomainError("extend_two_sided: horizon must be positive");
  bm.extend(m, K, K);
}

} // namespace rwfbm
