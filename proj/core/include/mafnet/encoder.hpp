#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mafnet/ops.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

// Multi-scale features of one image. Channel widths are fixed by the encoder
// architecture: f4 carries kFeatChannels.
struct FeaturePyramid {
  Var f4;   // [B, 48, H/4,  W/4]
  Var f8;   // [B, 32, H/8,  W/8]
  Var f16;  // [B, 64, H/16, W/16]
};

// One parameter set serves both images of a pair (weight sharing).
// Five stride-2 3x3 stages (3 -> 16 -> 24 -> 32 -> 64 -> 96, scales 1/2 ..
// 1/32) followed by 4x4 stride-2 transposed-conv merges back up to 1/4.
struct EncoderParams {
  Var w1, b1, w2, b2, w3, b3, w4, b4, w5, b5;  // strided stages
  Var u16w, u16b;                              // 1/32 -> 1/16 merge (add skip)
  Var u8w, u8b;                                // 1/16 -> 1/8 merge (add skip)
  Var u4w, u4b;                                // 1/8 -> 1/4 merge (concat skip)
};

inline constexpr std::int64_t kFeatChannels = 48;  // f4 channels after the concat merge
inline constexpr double kLeakySlope = 0.1;

EncoderParams init_encoder(Rng& rng);

// Named views of every trainable tensor, for the optimizer and checkpoints.
std::vector<std::pair<std::string, Var>> encoder_param_list(const EncoderParams& p);

// Runs both images through the same parameters. H and W must be multiples of
// 32 (and >= 32); violations name the padded extents that would work.
std::pair<FeaturePyramid, FeaturePyramid> extract(const Var& left, const Var& right,
                                                  const EncoderParams& p);

FeaturePyramid encode_one(const Var& image, const EncoderParams& p);

}  // namespace mafnet
