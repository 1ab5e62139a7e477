#include "mafnet/affa.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mafnet/rng.hpp"

namespace mafnet {
namespace {

double sum_sq(const Tensor& t) {
  double e = 0.0;
  for (std::int64_t i = 0; i < t.size(); ++i) e += t[i] * t[i];
  return e;
}

TEST(Affa, RadialGridFixtures) {
  const Tensor r = radial_grid(8, 8);
  ASSERT_EQ(r.shape(), (Shape{8, 5}));
  EXPECT_DOUBLE_EQ(r.at({0, 0}), 0.0);                      // DC
  EXPECT_DOUBLE_EQ(r.at({4, 4}), 1.0);                      // Nyquist corner
  EXPECT_DOUBLE_EQ(r.at({0, 4}), 1.0 / std::sqrt(2.0));     // horizontal Nyquist
  EXPECT_DOUBLE_EQ(r.at({4, 0}), 1.0 / std::sqrt(2.0));     // vertical Nyquist
  EXPECT_DOUBLE_EQ(r.at({2, 2}), 0.5);                      // both axes halfway
  // Vertical frequency wraps: rows u and h-u see the same |f_u|.
  for (std::int64_t u = 1; u < 4; ++u) {
    for (std::int64_t v = 0; v < 5; ++v) {
      EXPECT_DOUBLE_EQ(r.at({u, v}), r.at({8 - u, v}));
    }
  }
  // Strictly increasing along the DC row.
  for (std::int64_t v = 1; v < 5; ++v) EXPECT_GT(r.at({0, v}), r.at({0, v - 1}));
  EXPECT_THROW(radial_grid(1, 8), DimensionError);
}

TEST(Affa, ThresholdAndTemperatureMappings) {
  Rng rng(501);
  AffaParams p = init_affa(8, rng);
  EXPECT_DOUBLE_EQ(tau_low_of(p)->value[0], 0.5);   // sigmoid(0)
  EXPECT_DOUBLE_EQ(tau_high_of(p)->value[0], 0.5);
  EXPECT_NEAR(gamma_of(p)->value[0], 0.1, 1e-15);
  p.gamma_raw->value[0] = std::log(0.05);
  EXPECT_NEAR(gamma_of(p)->value[0], 0.05, 1e-15);
  // Raw values are unconstrained; the mapped ranges are (0,1) and (0,inf).
  p.tau_low_raw->value[0] = -50.0;
  EXPECT_GT(tau_low_of(p)->value[0], 0.0);
  p.tau_low_raw->value[0] = 50.0;
  EXPECT_LT(tau_low_of(p)->value[0], 1.0);
}

TEST(Affa, MaskMidpointAndMonotonicity) {
  Rng rng(502);
  AffaParams p = init_affa(8, rng);  // tau = 0.5, gamma = 0.1
  const Tensor grid = radial_grid(8, 8);
  auto [m_low, m_high] = soft_masks(grid, p);
  ASSERT_EQ(m_low->value.shape(), grid.shape());

  // At r == tau both transitions sit exactly at their midpoint.
  EXPECT_DOUBLE_EQ(m_low->value.at({2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(m_high->value.at({2, 2}), 0.5);

  // Low-pass decays with radius, high-pass grows, across every pair of bins.
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    for (std::int64_t j = 0; j < grid.size(); ++j) {
      if (grid[i] < grid[j]) {
        EXPECT_GE(m_low->value[i], m_low->value[j]);
        EXPECT_LE(m_high->value[i], m_high->value[j]);
      }
    }
  }
}

TEST(Affa, MonotoneInThresholdToo) {
  Rng rng(503);
  AffaParams p = init_affa(8, rng);
  const Tensor grid = radial_grid(8, 8);
  auto [lo1, hi1] = soft_masks(grid, p);
  p.tau_low_raw->value[0] = 1.0;  // larger threshold lets more through the low pass
  p.tau_high_raw->value[0] = 1.0;
  auto [lo2, hi2] = soft_masks(grid, p);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(lo2->value[i], lo1->value[i]);
    EXPECT_LE(hi2->value[i], hi1->value[i]);
  }
}

TEST(Affa, EqualThresholdsReconstructExactly) {
  Rng rng(504);
  for (double raw : {0.0, 0.7, -1.3}) {
    AffaParams p = init_affa(8, rng);
    p.tau_low_raw->value[0] = raw;
    p.tau_high_raw->value[0] = raw;
    const Var x = constant(Tensor::uniform({2, 8, 8, 8}, rng, -1.0, 1.0));
    auto [m_low, m_high] = soft_masks(radial_grid(8, 8), p);
    auto [x_low, x_high] = decompose(x, m_low, m_high);
    Tensor sum = x_low->value;
    for (std::int64_t i = 0; i < sum.size(); ++i) sum[i] += x_high->value[i];
    EXPECT_LE(max_abs_diff(sum, x->value), 1e-9) << "raw " << raw;
  }
}

TEST(Affa, DecomposeIsLinear) {
  Rng rng(505);
  AffaParams p = init_affa(8, rng);
  p.tau_high_raw->value[0] = 0.4;  // distinct bands
  const Tensor xt = Tensor::uniform({1, 2, 8, 8}, rng, -1.0, 1.0);
  const Tensor yt = Tensor::uniform({1, 2, 8, 8}, rng, -1.0, 1.0);
  const double a = 0.8, b = -1.7;
  Tensor comb(xt.shape());
  for (std::int64_t i = 0; i < comb.size(); ++i) comb[i] = a * xt[i] + b * yt[i];
  auto masks = soft_masks(radial_grid(8, 8), p);
  auto [xl, xh] = decompose(constant(xt), masks.first, masks.second);
  auto [yl, yh] = decompose(constant(yt), masks.first, masks.second);
  auto [cl, ch] = decompose(constant(comb), masks.first, masks.second);
  double worst = 0.0;
  for (std::int64_t i = 0; i < cl->value.size(); ++i) {
    worst = std::max(worst, std::abs(cl->value[i] - (a * xl->value[i] + b * yl->value[i])));
    worst = std::max(worst, std::abs(ch->value[i] - (a * xh->value[i] + b * yh->value[i])));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Affa, NyquistCheckerboardRoutesToHighBand) {
  Rng rng(506);
  AffaParams p = init_affa(2, rng);
  p.tau_high_raw->value[0] = 0.0;             // tau_high = 0.5
  p.gamma_raw->value[0] = std::log(0.05);     // gamma = 0.05
  Tensor x(Shape{1, 2, 8, 8});
  for (std::int64_t c = 0; c < 2; ++c) {
    for (std::int64_t y = 0; y < 8; ++y) {
      for (std::int64_t xx = 0; xx < 8; ++xx) {
        x.at({0, c, y, xx}) = ((y + xx) % 2 == 0) ? 1.0 : -1.0;
      }
    }
  }
  auto [m_low, m_high] = soft_masks(radial_grid(8, 8), p);
  auto [x_low, x_high] = decompose(constant(x), m_low, m_high);
  const double e_high = sum_sq(x_high->value);
  const double e_low = sum_sq(x_low->value);
  EXPECT_GE(e_high / (e_low + e_high), 0.99);
}

TEST(Affa, GateIsAConvexCombination) {
  Rng rng(507);
  AffaParams p = init_affa(8, rng);
  const Var x = constant(Tensor::uniform({2, 8, 8, 8}, rng, -1.0, 1.0));
  auto [m_low, m_high] = soft_masks(radial_grid(8, 8), p);
  auto [x_low, x_high] = decompose(x, m_low, m_high);
  Var fused = fuse_gate(x_low, x_high, p);
  ASSERT_EQ(fused->value.shape(), x->value.shape());
  for (std::int64_t i = 0; i < fused->value.size(); ++i) {
    const double lo = std::min(x_low->value[i], x_high->value[i]) - 1e-12;
    const double hi = std::max(x_low->value[i], x_high->value[i]) + 1e-12;
    EXPECT_GE(fused->value[i], lo);
    EXPECT_LE(fused->value[i], hi);
  }

  // Zeroed gate weights leave an unbiased softmax: the exact midpoint.
  p.gate_w->value.fill(0.0);
  Var mid = fuse_gate(x_low, x_high, p);
  double worst = 0.0;
  for (std::int64_t i = 0; i < mid->value.size(); ++i) {
    worst = std::max(worst,
                     std::abs(mid->value[i] - 0.5 * (x_low->value[i] + x_high->value[i])));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Affa, MapsTileToExactlyOne) {
  Rng rng(508);
  AffaParams p = init_affa(8, rng);
  const Var x = constant(Tensor::uniform({2, 8, 8, 8}, rng, -1.0, 1.0));
  AttentionMaps maps = affa_forward(x, p);
  ASSERT_EQ(maps.a_high->value.shape(), (Shape{2, 1, 8, 8}));
  ASSERT_EQ(maps.a_low->value.shape(), (Shape{2, 1, 8, 8}));
  for (std::int64_t i = 0; i < maps.a_high->value.size(); ++i) {
    const double ah = maps.a_high->value[i];
    const double al = maps.a_low->value[i];
    EXPECT_GT(ah, 0.0);
    EXPECT_LT(ah, 1.0);
    EXPECT_EQ(al + ah, 1.0);  // bit-exact tiling
  }
}

TEST(Affa, ParamListAndValidation) {
  Rng rng(509);
  AffaParams p = init_affa(8, rng);
  auto params = affa_param_list(p);
  EXPECT_EQ(params.size(), 9u);
  for (const auto& [name, v] : params) EXPECT_TRUE(v->requires_grad) << name;
  EXPECT_THROW(init_affa(7, rng), ConfigError);
  EXPECT_THROW(init_affa(0, rng), ConfigError);

  // Mask extents must match the half spectrum of the input.
  const Var x = constant(Tensor(Shape{1, 2, 8, 8}));
  auto masks = soft_masks(radial_grid(4, 8), p);
  EXPECT_THROW(decompose(x, masks.first, masks.second), DimensionError);
}

}  // namespace
}  // namespace mafnet
