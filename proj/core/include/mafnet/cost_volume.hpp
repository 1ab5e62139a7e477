#pragma once

#include "mafnet/ops.hpp"

namespace mafnet {

// Group-wise correlation volume over quarter-resolution features. Disparity
// candidates run 0 .. D4-1 in quarter-resolution units; dmax keeps the
// full-resolution range the volume covers (4 * D4).
struct CostVolume {
  Var grouped;        // [B, Ng, D4, H4, W4]
  std::int64_t dmax;  // full-resolution maximum disparity, pixels
};

// C(b,g,d,y,x) = (ng/Nc) * <left group g at (x,y), right group g at (x-d,y)>
// for x >= d, exactly 0 otherwise. Nc must divide into ng groups and
// dmax4 <= W4.
CostVolume build_gwc(const Var& f_l, const Var& f_r, std::int64_t dmax4, std::int64_t ng);

// Brute-force reference: plain nested loops over (b, g, d, y, x, channel).
// Same contract as build_gwc; meant for small extents.
Tensor gwc_oracle(const Tensor& f_l, const Tensor& f_r, std::int64_t dmax4, std::int64_t ng);

// Collapses the group axis by mean: [B, Ng, D4, H4, W4] -> [B, D4, H4, W4].
Var mean_over_groups(const CostVolume& cv);

}  // namespace mafnet
