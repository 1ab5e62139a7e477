#include "mafnet/encoder.hpp"

#include <cmath>

#include "mafnet/init.hpp"

namespace mafnet {

namespace {

constexpr std::int64_t kWidths[] = {3, 16, 24, 32, 64, 96};

// Every conv here feeds a leaky rectifier; this gain keeps activation
// variance roughly constant through the stack instead of decaying per layer.
const double kRectifierGain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));

Var stage_conv(Shape shape, Rng& rng, const std::string& name) {
  const std::int64_t fan_in = shape[1] * shape[2] * shape[3];
  return fan_in_param(std::move(shape), fan_in, rng, name, kRectifierGain);
}

Var merge_tconv(Shape shape, Rng& rng, const std::string& name) {
  // transposed weights are [Ci, Co, kh, kw]; fan-in counts input connections
  const std::int64_t fan_in = shape[0] * shape[2] * shape[3];
  return fan_in_param(std::move(shape), fan_in, rng, name, kRectifierGain);
}

void check_extents(const Var& image, const char* which) {
  const Shape& s = image->value.shape();
  if (s.size() != 4 || s[1] != 3) {
    throw DimensionError(std::string("extract: ") + which + " must be [B,3,H,W], got " +
                         shape_str(s));
  }
  const std::int64_t h = s[2], w = s[3];
  if (h < 32 || w < 32 || h % 32 != 0 || w % 32 != 0) {
    const std::int64_t ph = h < 32 ? 32 : ((h + 31) / 32) * 32;
    const std::int64_t pw = w < 32 ? 32 : ((w + 31) / 32) * 32;
    throw DimensionError(std::string("extract: ") + which + " extents " + std::to_string(h) + "x" +
                         std::to_string(w) + " must be multiples of 32 (pad to " +
                         std::to_string(ph) + "x" + std::to_string(pw) + ")");
  }
}

}  // namespace

EncoderParams init_encoder(Rng& rng) {
  EncoderParams p;
  p.w1 = stage_conv({kWidths[1], kWidths[0], 3, 3}, rng, "encoder.w1");
  p.b1 = zeros_param({kWidths[1]}, "encoder.b1");
  p.w2 = stage_conv({kWidths[2], kWidths[1], 3, 3}, rng, "encoder.w2");
  p.b2 = zeros_param({kWidths[2]}, "encoder.b2");
  p.w3 = stage_conv({kWidths[3], kWidths[2], 3, 3}, rng, "encoder.w3");
  p.b3 = zeros_param({kWidths[3]}, "encoder.b3");
  p.w4 = stage_conv({kWidths[4], kWidths[3], 3, 3}, rng, "encoder.w4");
  p.b4 = zeros_param({kWidths[4]}, "encoder.b4");
  p.w5 = stage_conv({kWidths[5], kWidths[4], 3, 3}, rng, "encoder.w5");
  p.b5 = zeros_param({kWidths[5]}, "encoder.b5");
  p.u16w = merge_tconv({kWidths[5], kWidths[4], 4, 4}, rng, "encoder.u16w");
  p.u16b = zeros_param({kWidths[4]}, "encoder.u16b");
  p.u8w = merge_tconv({kWidths[4], kWidths[3], 4, 4}, rng, "encoder.u8w");
  p.u8b = zeros_param({kWidths[3]}, "encoder.u8b");
  p.u4w = merge_tconv({kWidths[3], kWidths[2], 4, 4}, rng, "encoder.u4w");
  p.u4b = zeros_param({kWidths[2]}, "encoder.u4b");
  return p;
}

std::vector<std::pair<std::string, Var>> encoder_param_list(const EncoderParams& p) {
  return {
      {"encoder.w1", p.w1},   {"encoder.b1", p.b1},   {"encoder.w2", p.w2},
      {"encoder.b2", p.b2},   {"encoder.w3", p.w3},   {"encoder.b3", p.b3},
      {"encoder.w4", p.w4},   {"encoder.b4", p.b4},   {"encoder.w5", p.w5},
      {"encoder.b5", p.b5},   {"encoder.u16w", p.u16w}, {"encoder.u16b", p.u16b},
      {"encoder.u8w", p.u8w}, {"encoder.u8b", p.u8b}, {"encoder.u4w", p.u4w},
      {"encoder.u4b", p.u4b},
  };
}

FeaturePyramid encode_one(const Var& image, const EncoderParams& p) {
  check_extents(image, "image");
  const Var s1 = leaky_relu(conv2d(image, p.w1, p.b1, 2, 1), kLeakySlope);  // 1/2, 16
  const Var s2 = leaky_relu(conv2d(s1, p.w2, p.b2, 2, 1), kLeakySlope);    // 1/4, 24
  const Var s3 = leaky_relu(conv2d(s2, p.w3, p.b3, 2, 1), kLeakySlope);    // 1/8, 32
  const Var s4 = leaky_relu(conv2d(s3, p.w4, p.b4, 2, 1), kLeakySlope);    // 1/16, 64
  const Var s5 = leaky_relu(conv2d(s4, p.w5, p.b5, 2, 1), kLeakySlope);    // 1/32, 96

  FeaturePyramid out;
  out.f16 = leaky_relu(add(conv_transpose2d(s5, p.u16w, p.u16b, 2, 1), s4), kLeakySlope);
  out.f8 = leaky_relu(add(conv_transpose2d(out.f16, p.u8w, p.u8b, 2, 1), s3), kLeakySlope);
  const Var up4 = leaky_relu(conv_transpose2d(out.f8, p.u4w, p.u4b, 2, 1), kLeakySlope);
  out.f4 = concat({up4, s2}, 1);  // 24 + 24 = kFeatChannels
  return out;
}

std::pair<FeaturePyramid, FeaturePyramid> extract(const Var& left, const Var& right,
                                                  const EncoderParams& p) {
  check_extents(left, "left");
  check_extents(right, "right");
  if (left->value.shape() != right->value.shape()) {
    throw DimensionError("extract: left " + shape_str(left->value.shape()) + " and right " +
                         shape_str(right->value.shape()) + " extents differ");
  }
  return {encode_one(left, p), encode_one(right, p)};
}

}  // namespace mafnet
