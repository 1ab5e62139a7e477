#include "mafnet/disparity.hpp"

#include <algorithm>
#include <cmath>

#include "mafnet/init.hpp"

namespace mafnet {

UpsampleParams init_upsample(Rng& rng) {
  UpsampleParams p;
  p.guide_w1 = fan_in_param({kGuideChannels, 3, 3, 3}, 3 * 9, rng, "upsample.guide_w1",
                            std::sqrt(2.0 / 1.01));
  p.guide_b1 = zeros_param({kGuideChannels}, "upsample.guide_b1");
  p.guide_w2 = fan_in_param({9, kGuideChannels, 3, 3}, kGuideChannels * 9, rng, "upsample.guide_w2");
  p.guide_b2 = zeros_param({9}, "upsample.guide_b2");
  return p;
}

std::vector<std::pair<std::string, Var>> upsample_param_list(const UpsampleParams& p) {
  return {
      {"upsample.guide_w1", p.guide_w1},
      {"upsample.guide_b1", p.guide_b1},
      {"upsample.guide_w2", p.guide_w2},
      {"upsample.guide_b2", p.guide_b2},
  };
}

Var soft_argmax(const Var& c) {
  const Shape& s = c->value.shape();
  if (s.size() != 4) throw DimensionError("soft_argmax: volume must be [B,D4,H4,W4], got " + shape_str(s));
  const std::int64_t d4 = s[1];
  if (d4 < 2) throw DimensionError("soft_argmax: need at least 2 disparity candidates");
  Tensor dgrid{Shape{1, d4, 1, 1}};
  for (std::int64_t d = 0; d < d4; ++d) dgrid[d] = static_cast<double>(d);
  const Var probs = softmax(c, 1);
  return reduce_sum(mul(probs, constant(std::move(dgrid))), 1, /*keepdims=*/false);
}

Var upsample_weights(const Var& left_image, const UpsampleParams& p) {
  const Var feat = leaky_relu(conv2d(left_image, p.guide_w1, p.guide_b1, 1, 1), 0.1);
  return softmax(conv2d(feat, p.guide_w2, p.guide_b2, 1, 1), 1);
}

Var convex_upsample(const Var& coarse, const Var& weights) {
  const Shape& cs = coarse->value.shape();
  const Shape& ws = weights->value.shape();
  if (cs.size() != 3) throw DimensionError("convex_upsample: coarse map must be [B,H4,W4], got " + shape_str(cs));
  const std::int64_t b = cs[0], h4 = cs[1], w4 = cs[2];
  const std::int64_t h = 4 * h4, w = 4 * w4;
  if (ws.size() != 4 || ws[0] != b || ws[1] != 9 || ws[2] != h || ws[3] != w) {
    throw DimensionError("convex_upsample: weights " + shape_str(ws) + " do not match coarse " +
                         shape_str(cs) + " upsampled 4x");
  }
  Tensor out{Shape{b, h, w}};
  const Tensor& cv = coarse->value;
  const Tensor& wv = weights->value;
  for (std::int64_t bi = 0; bi < b; ++bi) {
    for (std::int64_t y = 0; y < h; ++y) {
      const std::int64_t cy = y / 4;
      for (std::int64_t x = 0; x < w; ++x) {
        const std::int64_t cx = x / 4;
        double acc = 0.0;
        for (std::int64_t j = 0; j < 9; ++j) {
          const std::int64_t ny = std::clamp(cy + j / 3 - 1, std::int64_t{0}, h4 - 1);
          const std::int64_t nx = std::clamp(cx + j % 3 - 1, std::int64_t{0}, w4 - 1);
          acc += wv[((bi * 9 + j) * h + y) * w + x] * cv[(bi * h4 + ny) * w4 + nx];
        }
        out[(bi * h + y) * w + x] = 4.0 * acc;
      }
    }
  }
  return make_op("convex_upsample", std::move(out), {coarse, weights},
                 [coarse, weights, b, h4, w4, h, w](Node& self) {
    const bool need_c = coarse->requires_grad;
    const bool need_w = weights->requires_grad;
    Tensor gc = need_c ? Tensor{coarse->value.shape()} : Tensor{};
    Tensor gw = need_w ? Tensor{weights->value.shape()} : Tensor{};
    for (std::int64_t bi = 0; bi < b; ++bi) {
      for (std::int64_t y = 0; y < h; ++y) {
        const std::int64_t cy = y / 4;
        for (std::int64_t x = 0; x < w; ++x) {
          const std::int64_t cx = x / 4;
          const double g = 4.0 * self.grad[(bi * h + y) * w + x];
          for (std::int64_t j = 0; j < 9; ++j) {
            const std::int64_t ny = std::clamp(cy + j / 3 - 1, std::int64_t{0}, h4 - 1);
            const std::int64_t nx = std::clamp(cx + j % 3 - 1, std::int64_t{0}, w4 - 1);
            if (need_c) gc[(bi * h4 + ny) * w4 + nx] += g * weights->value[((bi * 9 + j) * h + y) * w + x];
            if (need_w) gw[((bi * 9 + j) * h + y) * w + x] = g * coarse->value[(bi * h4 + ny) * w4 + nx];
          }
        }
      }
    }
    if (need_c) accumulate_grad(*coarse, gc, "convex_upsample");
    if (need_w) accumulate_grad(*weights, gw, "convex_upsample");
  });
}

Var upsample_full(const Var& coarse, const Var& left_image, const UpsampleParams& p) {
  return convex_upsample(coarse, upsample_weights(left_image, p));
}

Var smooth_l1_masked(const Var& pred, const Tensor& gt, const std::vector<std::uint8_t>& valid) {
  if (pred->value.shape() != gt.shape()) {
    throw DimensionError("smooth_l1_masked: prediction " + shape_str(pred->value.shape()) +
                         " and target " + shape_str(gt.shape()) + " shapes differ");
  }
  if (static_cast<std::int64_t>(valid.size()) != gt.size()) {
    throw DimensionError("smooth_l1_masked: mask length " + std::to_string(valid.size()) +
                         " does not match " + std::to_string(gt.size()) + " elements");
  }
  std::int64_t n_valid = 0;
  double acc = 0.0;
  for (std::int64_t i = 0; i < gt.size(); ++i) {
    if (!valid[static_cast<std::size_t>(i)]) continue;
    ++n_valid;
    const double x = pred->value[i] - gt[i];
    acc += std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5;
  }
  if (n_valid == 0) throw ContractError("smooth_l1_masked: no valid pixels");
  const double inv_n = 1.0 / static_cast<double>(n_valid);
  return make_op("smooth_l1", Tensor::scalar(acc * inv_n), {pred},
                 [pred, gt, valid, inv_n](Node& self) {
    Tensor g{pred->value.shape()};
    const double go = self.grad[0] * inv_n;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      if (!valid[static_cast<std::size_t>(i)]) continue;
      const double x = pred->value[i] - gt[i];
      g[i] = go * (std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0));
    }
    accumulate_grad(*pred, g, "smooth_l1");
  });
}

Tensor quarter_gt(const Tensor& gt_full) {
  if (gt_full.rank() != 3) throw DimensionError("quarter_gt: expected [B,H,W], got " + shape_str(gt_full.shape()));
  const std::int64_t b = gt_full.dim(0), h = gt_full.dim(1), w = gt_full.dim(2);
  if (h % 4 != 0 || w % 4 != 0) throw DimensionError("quarter_gt: extents must be multiples of 4");
  Tensor out{Shape{b, h / 4, w / 4}};
  for (std::int64_t bi = 0; bi < b; ++bi) {
    for (std::int64_t y = 0; y < h / 4; ++y) {
      for (std::int64_t x = 0; x < w / 4; ++x) {
        out.at({bi, y, x}) = gt_full.at({bi, 4 * y, 4 * x}) / 4.0;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> quarter_mask(const std::vector<std::uint8_t>& valid, std::int64_t b,
                                       std::int64_t h, std::int64_t w) {
  if (static_cast<std::int64_t>(valid.size()) != b * h * w) {
    throw DimensionError("quarter_mask: mask length does not match extents");
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(b * (h / 4) * (w / 4)));
  for (std::int64_t bi = 0; bi < b; ++bi) {
    for (std::int64_t y = 0; y < h / 4; ++y) {
      for (std::int64_t x = 0; x < w / 4; ++x) {
        out[static_cast<std::size_t>((bi * (h / 4) + y) * (w / 4) + x)] =
            valid[static_cast<std::size_t>((bi * h + 4 * y) * w + 4 * x)];
      }
    }
  }
  return out;
}

Var total_loss(const Var& d0, const Var& d1, const Tensor& gt_full,
               const std::vector<std::uint8_t>& valid, double lambda0, double lambda1) {
  if (lambda0 < 0.0 || lambda1 < 0.0) throw ConfigError("total_loss: loss weights must be >= 0");
  const std::int64_t b = gt_full.dim(0), h = gt_full.dim(1), w = gt_full.dim(2);
  const Tensor gtq = quarter_gt(gt_full);
  const std::vector<std::uint8_t> validq = quarter_mask(valid, b, h, w);
  const Var coarse_term = smooth_l1_masked(d0, gtq, validq);
  const Var full_term = smooth_l1_masked(d1, gt_full, valid);
  return add(mul_scalar(coarse_term, lambda0), mul_scalar(full_term, lambda1));
}

}  // namespace mafnet
