// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace rwfbm {

class Hierarchy;

/// Flips twisted step n (1-based) of a level in place. Fault injection only.
void corrupt_twisted_step(Hierarchy& h, unsigned level, std::uint64_t n);

} // namespace rwfbm
