#pragma once

#include <cstdint>
#include <vector>

#include "mafnet/tensor.hpp"

namespace mafnet {

// Full-resolution disparity field with per-pixel validity. Invalid pixels
// are excluded from every loss and metric; their stored value is arbitrary.
struct DisparityMap {
  Tensor values;                    // [H, W]
  std::vector<std::uint8_t> valid;  // H*W entries, 1 = valid

  std::int64_t height() const { return values.dim(0); }
  std::int64_t width() const { return values.dim(1); }
};

}  // namespace mafnet
