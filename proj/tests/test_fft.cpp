#include "mafnet/fft.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "mafnet/rng.hpp"

namespace mafnet {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Direct O((HW)^2) reference transform, written against the definition only.
std::vector<std::complex<double>> dft2_reference(const Tensor& x) {
  const std::int64_t h = x.dim(0), w = x.dim(1);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h * w));
  for (std::int64_t ky = 0; ky < h; ++ky) {
    for (std::int64_t kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0.0;
      for (std::int64_t y = 0; y < h; ++y) {
        for (std::int64_t xx = 0; xx < w; ++xx) {
          const double ang = -2.0 * kPi * (static_cast<double>(ky * y) / static_cast<double>(h) +
                                           static_cast<double>(kx * xx) / static_cast<double>(w));
          acc += x.at({y, xx}) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      out[static_cast<std::size_t>(ky * w + kx)] = acc;
    }
  }
  return out;
}

Tensor random_image(std::int64_t h, std::int64_t w, Rng& rng) {
  return Tensor::uniform({h, w}, rng, -1.0, 1.0);
}

TEST(Fft, MatchesDirectTransform) {
  Rng rng(101);
  for (std::int64_t h : {2, 3, 4, 6, 8, 16}) {
    for (std::int64_t w : {2, 4, 5, 8, 12, 32}) {
      const Tensor x = random_image(h, w, rng);
      const ComplexTensor xh = rfft2(x);
      ASSERT_EQ(xh.shape(), (Shape{h, w / 2 + 1}));
      const auto ref = dft2_reference(x);
      const std::int64_t wh = w / 2 + 1;
      double worst = 0.0;
      for (std::int64_t ky = 0; ky < h; ++ky) {
        for (std::int64_t kx = 0; kx < wh; ++kx) {
          worst = std::max(worst, std::abs(xh.get(ky * wh + kx) -
                                           ref[static_cast<std::size_t>(ky * w + kx)]));
        }
      }
      EXPECT_LE(worst, 1e-9) << h << "x" << w;
    }
  }
}

TEST(Fft, RoundTripAllSizes4Through32) {
  Rng rng(102);
  for (std::int64_t h = 4; h <= 32; ++h) {
    for (std::int64_t w = 4; w <= 32; ++w) {
      const Tensor x = random_image(h, w, rng);
      const Tensor back = irfft2(rfft2(x), w);
      EXPECT_LE(max_abs_diff(x, back), 1e-9) << h << "x" << w;
    }
  }
}

TEST(Fft, LinearityHolds) {
  Rng rng(103);
  for (std::int64_t h : {4, 7, 16, 32}) {
    for (std::int64_t w : {4, 10, 32}) {
      const Tensor x = random_image(h, w, rng);
      const Tensor y = random_image(h, w, rng);
      const double a = 1.75, b = -0.3;
      Tensor comb(Shape{h, w});
      for (std::int64_t i = 0; i < comb.size(); ++i) comb[i] = a * x[i] + b * y[i];
      const ComplexTensor lhs = rfft2(comb);
      const ComplexTensor xh = rfft2(x);
      const ComplexTensor yh = rfft2(y);
      double worst = 0.0;
      for (std::int64_t i = 0; i < lhs.size(); ++i) {
        worst = std::max(worst, std::abs(lhs.get(i) - (a * xh.get(i) + b * yh.get(i))));
      }
      EXPECT_LE(worst, 1e-9) << h << "x" << w;
    }
  }
}

// Energy bookkeeping on the half spectrum: columns 0 and (if w even) w/2 carry
// their own conjugate, every other column stands for two full-spectrum bins.
double spectrum_energy(const ComplexTensor& xh, std::int64_t w) {
  const std::int64_t h = xh.shape()[0], wh = xh.shape()[1];
  double e = 0.0;
  for (std::int64_t ky = 0; ky < h; ++ky) {
    for (std::int64_t kx = 0; kx < wh; ++kx) {
      const bool self_conjugate = (kx == 0) || (w % 2 == 0 && kx == w / 2);
      const double m = std::norm(xh.get(ky * wh + kx));
      e += self_conjugate ? m : 2.0 * m;
    }
  }
  return e;
}

TEST(Fft, ParsevalHolds) {
  Rng rng(104);
  for (std::int64_t h = 4; h <= 32; ++h) {
    for (std::int64_t w = 4; w <= 32; ++w) {
      const Tensor x = random_image(h, w, rng);
      double spatial = 0.0;
      for (std::int64_t i = 0; i < x.size(); ++i) spatial += x[i] * x[i];
      const double spectral = spectrum_energy(rfft2(x), w) / static_cast<double>(h * w);
      EXPECT_LE(std::abs(spatial - spectral) / std::max(1.0, spatial), 1e-6) << h << "x" << w;
    }
  }
}

TEST(Fft, BatchedAxesTransformIndependently) {
  Rng rng(105);
  Tensor x = Tensor::uniform({2, 3, 8, 8}, rng, -1.0, 1.0);
  const Tensor xh = rfft2_packed(x);
  ASSERT_EQ(xh.shape(), (Shape{2, 3, 8, 5, 2}));
  // Each [8,8] slice must match its own standalone transform.
  for (std::int64_t b = 0; b < 2; ++b) {
    for (std::int64_t c = 0; c < 3; ++c) {
      Tensor slice(Shape{8, 8});
      for (std::int64_t i = 0; i < 64; ++i) slice[i] = x[(b * 3 + c) * 64 + i];
      const Tensor sh = rfft2_packed(slice);
      double worst = 0.0;
      for (std::int64_t i = 0; i < sh.size(); ++i) {
        worst = std::max(worst, std::abs(sh[i] - xh[(b * 3 + c) * sh.size() + i]));
      }
      EXPECT_LE(worst, 1e-12);
    }
  }
  EXPECT_LE(max_abs_diff(irfft2_packed(xh, 8), x), 1e-9);
}

TEST(Fft, PackedRoundTripOddWidth) {
  Rng rng(106);
  const Tensor x = random_image(9, 7, rng);
  const Tensor xh = rfft2_packed(x);
  ASSERT_EQ(xh.shape(), (Shape{9, 4, 2}));
  EXPECT_LE(max_abs_diff(irfft2_packed(xh, 7), x), 1e-9);
}

// <A x, y> == <x, A* y> pins the adjoint used by the differentiable spectra.
TEST(Fft, PackedAdjointIdentity) {
  Rng rng(107);
  for (std::int64_t h : {4, 6, 8}) {
    for (std::int64_t w : {4, 6, 10}) {
      const Tensor x = random_image(h, w, rng);
      const Tensor yh = Tensor::uniform({h, w / 2 + 1, 2}, rng, -1.0, 1.0);

      const Tensor ax = rfft2_packed(x);
      double lhs = 0.0;
      for (std::int64_t i = 0; i < ax.size(); ++i) lhs += ax[i] * yh[i];
      const Tensor aty = rfft2_packed_adjoint(yh, w);
      double rhs = 0.0;
      for (std::int64_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
      EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(lhs))) << h << "x" << w;

      const Tensor bx = irfft2_packed(yh, w);
      double lhs2 = 0.0;
      for (std::int64_t i = 0; i < bx.size(); ++i) lhs2 += bx[i] * x[i];
      const Tensor bty = irfft2_packed_adjoint(x);
      double rhs2 = 0.0;
      for (std::int64_t i = 0; i < yh.size(); ++i) rhs2 += yh[i] * bty[i];
      EXPECT_NEAR(lhs2, rhs2, 1e-9 * std::max(1.0, std::abs(lhs2))) << h << "x" << w;
    }
  }
}

TEST(Fft, RejectsDegenerateExtents) {
  EXPECT_THROW(rfft2(Tensor(Shape{1, 8})), DimensionError);
  EXPECT_THROW(rfft2(Tensor(Shape{8, 1})), DimensionError);
  EXPECT_THROW(rfft2(Tensor(Shape{8})), DimensionError);
  EXPECT_THROW(irfft2_packed(Tensor(Shape{4, 3, 2}), 1), DimensionError);
}

TEST(Fft, ConstantImageConcentratesAtDc) {
  const Tensor x = Tensor::full({8, 8}, 0.5);
  const ComplexTensor xh = rfft2(x);
  EXPECT_NEAR(xh.get(0).real(), 32.0, 1e-9);  // 0.5 * 64
  EXPECT_NEAR(xh.get(0).imag(), 0.0, 1e-9);
  for (std::int64_t i = 1; i < xh.size(); ++i) EXPECT_LE(std::abs(xh.get(i)), 1e-9);
}

}  // namespace
}  // namespace mafnet
