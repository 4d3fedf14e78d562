// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "rwfbm/step_source.hpp"

namespace fixtures {

// Hand-drawn two-level example: a three-step coarse walk and a sixteen-step
// fine walk with stopping times 8, 10, 16.
inline std::vector<int> sketch_level0() { return {1, 1, -1}; }

inline std::vector<int> sketch_level1_raw() {
  return {-1, 1, -1, 1, 1, -1, -1, -1, 1, 1, -1, 1, 1, -1, 1, 1};
}

inline std::shared_ptr<rwfbm::FixtureRawSteps> sketch_source() {
  auto src = std::make_shared<rwfbm::FixtureRawSteps>();
  src->set(rwfbm::Side::right, 0, sketch_level0());
  src->set(rwfbm::Side::right, 1, sketch_level1_raw());
  return src;
}

} // namespace fixtures
