#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mafnet/ops.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

// Full-resolution recovery head: a small conv stack over the left image
// predicts 9 logits per output pixel; each output pixel is 4x a softmax
// convex combination of its 3x3 coarse neighborhood.
struct UpsampleParams {
  Var guide_w1, guide_b1;  // [Cg, 3, 3, 3], [Cg]
  Var guide_w2, guide_b2;  // [9, Cg, 3, 3], [9]
};

inline constexpr std::int64_t kGuideChannels = 16;

UpsampleParams init_upsample(Rng& rng);
std::vector<std::pair<std::string, Var>> upsample_param_list(const UpsampleParams& p);

// Per-pixel expectation of the disparity index under softmax over the
// disparity axis: [B, D4, H4, W4] -> [B, H4, W4], values in [0, D4-1].
Var soft_argmax(const Var& c);

// Softmax-normalized combination weights from the left image: [B, 9, H, W].
Var upsample_weights(const Var& left_image, const UpsampleParams& p);

// out(y, x) = 4 * sum_j w(j, y, x) * coarse(clamp(y/4 + dy_j), clamp(x/4 + dx_j)),
// j indexing the 3x3 neighborhood row-major. The factor 4 converts
// quarter-resolution disparity units to full-resolution pixels.
Var convex_upsample(const Var& coarse, const Var& weights);

Var upsample_full(const Var& coarse, const Var& left_image, const UpsampleParams& p);

// Mean over valid pixels of the smooth-L1 penalty 0.5*x^2 (|x| < 1) else
// |x| - 0.5, x = pred - gt. valid runs parallel to gt, 1 = counted.
Var smooth_l1_masked(const Var& pred, const Tensor& gt, const std::vector<std::uint8_t>& valid);

// Nearest-neighbor quarter subsampling (top-left corner of each 4x4 block)
// of a [B, H, W] field and its validity mask; disparity values shrink by 4.
Tensor quarter_gt(const Tensor& gt_full);
std::vector<std::uint8_t> quarter_mask(const std::vector<std::uint8_t>& valid, std::int64_t b,
                                       std::int64_t h, std::int64_t w);

// lambda0 * smoothL1(d0 - gt/4 at quarter res) + lambda1 * smoothL1(d1 - gt).
Var total_loss(const Var& d0, const Var& d1, const Tensor& gt_full,
               const std::vector<std::uint8_t>& valid, double lambda0, double lambda1);

}  // namespace mafnet
