#include "mafnet/cost_volume.hpp"

#include <gtest/gtest.h>

#include "mafnet/rng.hpp"

namespace mafnet {
namespace {

Tensor rand_feat(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w, Rng& rng) {
  return Tensor::uniform({b, c, h, w}, rng, -1.0, 1.0);
}

// Definition check at one hand-sized instance: one batch, two channels in one
// group, correlation at disparity d reads the right view shifted left by d.
TEST(CostVolume, HandComputedInstance) {
  Tensor fl(Shape{1, 2, 1, 3}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  Tensor fr(Shape{1, 2, 1, 3}, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
  CostVolume cv = build_gwc(constant(fl), constant(fr), 2, 1);
  ASSERT_EQ(cv.grouped->value.shape(), (Shape{1, 1, 2, 1, 3}));
  EXPECT_EQ(cv.dmax, 8);  // quarter-scale disparity bins cover 4x pixels

  // d = 0: mean over the 2 channels of fl[.,x] * fr[.,x].
  EXPECT_DOUBLE_EQ(cv.grouped->value.at({0, 0, 0, 0, 0}), (1.0 * 0.5 + 4.0 * 2.0) / 2.0);
  EXPECT_DOUBLE_EQ(cv.grouped->value.at({0, 0, 0, 0, 2}), (3.0 * 1.5 + 6.0 * 3.0) / 2.0);
  // d = 1: x=0 has no x-1 in the right view, defined as zero.
  EXPECT_DOUBLE_EQ(cv.grouped->value.at({0, 0, 1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(cv.grouped->value.at({0, 0, 1, 0, 1}), (2.0 * 0.5 + 5.0 * 2.0) / 2.0);
}

TEST(CostVolume, MatchesOracleOnRandomInstances) {
  Rng rng(401);
  for (int it = 0; it < 40; ++it) {
    const std::int64_t b = 1 + rng.uniform_int(2);
    const std::int64_t ng = 1 + rng.uniform_int(4);
    const std::int64_t cpg = 1 + rng.uniform_int(2);  // channels per group
    const std::int64_t c = ng * cpg;
    const std::int64_t h = 1 + rng.uniform_int(8);
    const std::int64_t w = 1 + rng.uniform_int(8);
    const std::int64_t dmax4 = 1 + rng.uniform_int(std::min<std::int64_t>(4, w));
    const Tensor fl = rand_feat(b, c, h, w, rng);
    const Tensor fr = rand_feat(b, c, h, w, rng);
    CostVolume cv = build_gwc(constant(fl), constant(fr), dmax4, ng);
    const Tensor ref = gwc_oracle(fl, fr, dmax4, ng);
    ASSERT_EQ(cv.grouped->value.shape(), ref.shape());
    EXPECT_LE(max_abs_diff(cv.grouped->value, ref), 1e-12);
  }
}

TEST(CostVolume, OutOfRangeDisparityBinsAreZero) {
  Rng rng(402);
  const Tensor fl = rand_feat(1, 4, 3, 5, rng);
  const Tensor fr = rand_feat(1, 4, 3, 5, rng);
  CostVolume cv = build_gwc(constant(fl), constant(fr), 4, 2);
  for (std::int64_t g = 0; g < 2; ++g) {
    for (std::int64_t d = 0; d < 4; ++d) {
      for (std::int64_t y = 0; y < 3; ++y) {
        for (std::int64_t x = 0; x < d; ++x) {
          EXPECT_EQ(cv.grouped->value.at({0, g, d, y, x}), 0.0);
        }
      }
    }
  }
}

TEST(CostVolume, MeanOverGroupsAveragesGroupAxis) {
  Rng rng(403);
  const Tensor fl = rand_feat(2, 6, 2, 4, rng);
  const Tensor fr = rand_feat(2, 6, 2, 4, rng);
  CostVolume cv = build_gwc(constant(fl), constant(fr), 3, 3);
  Var m = mean_over_groups(cv);
  ASSERT_EQ(m->value.shape(), (Shape{2, 3, 2, 4}));
  double acc = 0.0;
  for (std::int64_t g = 0; g < 3; ++g) acc += cv.grouped->value.at({1, g, 2, 1, 3});
  EXPECT_NEAR(m->value.at({1, 2, 1, 3}), acc / 3.0, 1e-12);
}

TEST(CostVolume, RejectsBadArguments) {
  Rng rng(404);
  const Tensor fl = rand_feat(1, 6, 2, 4, rng);
  const Tensor fr = rand_feat(1, 6, 2, 4, rng);
  // Channels not divisible by groups.
  EXPECT_THROW(build_gwc(constant(fl), constant(fr), 2, 4), ConfigError);
  // Mismatched views.
  const Tensor small = rand_feat(1, 6, 2, 3, rng);
  EXPECT_THROW(build_gwc(constant(fl), constant(small), 2, 3), DimensionError);
  // Disparity candidate count outside [1, W4].
  EXPECT_THROW(build_gwc(constant(fl), constant(fr), 0, 3), ConfigError);
  EXPECT_THROW(build_gwc(constant(fl), constant(fr), 5, 3), ConfigError);
}

}  // namespace
}  // namespace mafnet
