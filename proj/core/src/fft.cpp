#include "mafnet/fft.hpp"

#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace mafnet {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Roots e^{-2*pi*i*k/n} for k in [0, n). Shared by both transform directions
// (conjugate on read for the inverse) and by the naive fallback, which indexes
// with (j*k) % n so the table is exact under periodicity.
const std::vector<cplx>& roots_for(std::int64_t n) {
  thread_local std::map<std::int64_t, std::vector<cplx>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<cplx> r(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
      const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      r[static_cast<std::size_t>(k)] = {std::cos(ang), std::sin(ang)};
    }
    it = cache.emplace(n, std::move(r)).first;
  }
  return it->second;
}

inline cplx root_at(const std::vector<cplx>& tab, std::int64_t k, int sign) {
  const cplx w = tab[static_cast<std::size_t>(k)];
  return sign < 0 ? w : std::conj(w);
}

// Iterative radix-2, in place. sign -1 = forward, +1 = inverse direction;
// neither applies a normalization.
void fft_pow2(cplx* a, std::int64_t n, int sign) {
  for (std::int64_t i = 1, j = 0; i < n; ++i) {
    std::int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tab = roots_for(n);
  for (std::int64_t len = 2; len <= n; len <<= 1) {
    const std::int64_t step = n / len;
    for (std::int64_t i = 0; i < n; i += len) {
      for (std::int64_t k = 0; k < len / 2; ++k) {
        const cplx w = root_at(tab, k * step, sign);
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// O(n^2) fallback for awkward lengths; desk-scale extents keep this cheap.
void dft_naive(cplx* a, std::int64_t n, int sign) {
  const auto& tab = roots_for(n);
  std::vector<cplx> out(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      acc += a[j] * root_at(tab, (j * k) % n, sign);
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  for (std::int64_t k = 0; k < n; ++k) a[k] = out[static_cast<std::size_t>(k)];
}

void fft_1d(cplx* a, std::int64_t n, int sign) {
  if (n == 1) return;
  if (is_pow2(n)) {
    fft_pow2(a, n, sign);
  } else {
    dft_naive(a, n, sign);
  }
}

// Unnormalized 2D transform of a full H x W complex buffer, row-major.
void fft2_buf(cplx* buf, std::int64_t h, std::int64_t w, int sign) {
  for (std::int64_t r = 0; r < h; ++r) fft_1d(buf + r * w, w, sign);
  std::vector<cplx> col(static_cast<std::size_t>(h));
  for (std::int64_t c = 0; c < w; ++c) {
    for (std::int64_t r = 0; r < h; ++r) col[static_cast<std::size_t>(r)] = buf[r * w + c];
    fft_1d(col.data(), h, sign);
    for (std::int64_t r = 0; r < h; ++r) buf[r * w + c] = col[static_cast<std::size_t>(r)];
  }
}

struct SpatialDims {
  std::int64_t batch;
  std::int64_t h;
  std::int64_t w;  // extent of the second-to-last... last spatial axis
};

SpatialDims split_spatial(const Shape& s, const char* what) {
  if (s.size() < 2) {
    throw DimensionError(std::string(what) + ": need rank >= 2, got shape " + shape_str(s));
  }
  SpatialDims d;
  d.h = s[s.size() - 2];
  d.w = s[s.size() - 1];
  if (d.h < 2 || d.w < 2) {
    throw DimensionError(std::string(what) + ": spatial extents must be >= 2, got shape " +
                         shape_str(s));
  }
  d.batch = 1;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) d.batch *= s[i];
  return d;
}

Shape with_tail(const Shape& s, std::int64_t a, std::int64_t b) {
  Shape out(s.begin(), s.end() - 2);
  out.push_back(a);
  out.push_back(b);
  return out;
}

// One H x W real slice -> H x Wh half-spectrum, written interleaved at `out`.
void rfft2_slice(const double* x, std::int64_t h, std::int64_t w, double* out) {
  const std::int64_t wh = w / 2 + 1;
  std::vector<cplx> buf(static_cast<std::size_t>(h * w));
  for (std::int64_t i = 0; i < h * w; ++i) buf[static_cast<std::size_t>(i)] = x[i];
  fft2_buf(buf.data(), h, w, -1);
  for (std::int64_t u = 0; u < h; ++u) {
    for (std::int64_t v = 0; v < wh; ++v) {
      const cplx z = buf[static_cast<std::size_t>(u * w + v)];
      out[2 * (u * wh + v)] = z.real();
      out[2 * (u * wh + v) + 1] = z.imag();
    }
  }
}

// One H x Wh half-spectrum slice (interleaved) -> H x W real output.
// Column transforms run on the stored half; the missing row tail is restored
// from Hermitian symmetry of the already-transformed rows, which the column
// pass preserves.
void irfft2_slice(const double* xh, std::int64_t h, std::int64_t w, double* out) {
  const std::int64_t wh = w / 2 + 1;
  std::vector<cplx> cols(static_cast<std::size_t>(h * wh));
  std::vector<cplx> col(static_cast<std::size_t>(h));
  for (std::int64_t v = 0; v < wh; ++v) {
    for (std::int64_t u = 0; u < h; ++u) {
      col[static_cast<std::size_t>(u)] = {xh[2 * (u * wh + v)], xh[2 * (u * wh + v) + 1]};
    }
    fft_1d(col.data(), h, +1);
    for (std::int64_t u = 0; u < h; ++u) cols[static_cast<std::size_t>(u * wh + v)] = col[static_cast<std::size_t>(u)];
  }
  const double scale = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  std::vector<cplx> row(static_cast<std::size_t>(w));
  for (std::int64_t p = 0; p < h; ++p) {
    for (std::int64_t v = 0; v < wh; ++v) row[static_cast<std::size_t>(v)] = cols[static_cast<std::size_t>(p * wh + v)];
    for (std::int64_t v = wh; v < w; ++v) {
      row[static_cast<std::size_t>(v)] = std::conj(cols[static_cast<std::size_t>(p * wh + (w - v))]);
    }
    fft_1d(row.data(), w, +1);
    for (std::int64_t q = 0; q < w; ++q) out[p * w + q] = row[static_cast<std::size_t>(q)].real() * scale;
  }
}

// Adjoint of rfft2_slice: cotangent on the half-spectrum scattered onto the
// full grid, positive-exponent unnormalized transform, real part.
void rfft2_adjoint_slice(const double* gh, std::int64_t h, std::int64_t w, double* out) {
  const std::int64_t wh = w / 2 + 1;
  std::vector<cplx> buf(static_cast<std::size_t>(h * w), cplx{0.0, 0.0});
  for (std::int64_t u = 0; u < h; ++u) {
    for (std::int64_t v = 0; v < wh; ++v) {
      buf[static_cast<std::size_t>(u * w + v)] = {gh[2 * (u * wh + v)], gh[2 * (u * wh + v) + 1]};
    }
  }
  fft2_buf(buf.data(), h, w, +1);
  for (std::int64_t i = 0; i < h * w; ++i) out[i] = buf[static_cast<std::size_t>(i)].real();
}

// Adjoint of irfft2_slice: forward transform of the real cotangent scaled by
// 1/(H*W); mirrored columns fold their reflection back in conjugated. The
// self-paired columns (v = 0 and, for even W, v = W/2) take only the direct
// term.
void irfft2_adjoint_slice(const double* g, std::int64_t h, std::int64_t w, double* out) {
  const std::int64_t wh = w / 2 + 1;
  std::vector<cplx> buf(static_cast<std::size_t>(h * w));
  for (std::int64_t i = 0; i < h * w; ++i) buf[static_cast<std::size_t>(i)] = g[i];
  fft2_buf(buf.data(), h, w, -1);
  const double scale = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  for (std::int64_t u = 0; u < h; ++u) {
    for (std::int64_t v = 0; v < wh; ++v) {
      cplx z = buf[static_cast<std::size_t>(u * w + v)];
      if (v != 0 && 2 * v != w) {
        const std::int64_t um = (h - u) % h;
        z += std::conj(buf[static_cast<std::size_t>(um * w + (w - v))]);
      }
      out[2 * (u * wh + v)] = z.real() * scale;
      out[2 * (u * wh + v) + 1] = z.imag() * scale;
    }
  }
}

std::int64_t check_half_tail(const Shape& s, std::int64_t width, const char* what) {
  const std::int64_t wh = s[s.size() - 1];
  if (width < 2 || width / 2 + 1 != wh) {
    throw DimensionError(std::string(what) + ": width " + std::to_string(width) +
                         " inconsistent with stored half extent " + std::to_string(wh));
  }
  return wh;
}

}  // namespace

ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(2 * shape_size(shape_)), 0.0);
}

ComplexTensor rfft2(const Tensor& x) {
  const SpatialDims d = split_spatial(x.shape(), "rfft2");
  const std::int64_t wh = d.w / 2 + 1;
  ComplexTensor out{with_tail(x.shape(), d.h, wh)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    rfft2_slice(x.data() + b * d.h * d.w, d.h, d.w, out.data() + 2 * b * d.h * wh);
  }
  return out;
}

Tensor irfft2(const ComplexTensor& xh, std::int64_t width) {
  const SpatialDims d = split_spatial(xh.shape(), "irfft2");
  check_half_tail(xh.shape(), width, "irfft2");
  Tensor out{with_tail(xh.shape(), d.h, width)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    irfft2_slice(xh.data() + 2 * b * d.h * d.w, d.h, width, out.data() + b * d.h * width);
  }
  return out;
}

Tensor rfft2_packed(const Tensor& x) {
  const SpatialDims d = split_spatial(x.shape(), "rfft2_packed");
  const std::int64_t wh = d.w / 2 + 1;
  Shape out_shape = with_tail(x.shape(), d.h, wh);
  out_shape.push_back(2);
  Tensor out{std::move(out_shape)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    rfft2_slice(x.data() + b * d.h * d.w, d.h, d.w, out.data() + 2 * b * d.h * wh);
  }
  return out;
}

namespace {

// Packed tensors carry [..., H, Wh, 2]; peel the marker axis and reuse the
// complex-shape helpers.
Shape drop_pair_axis(const Shape& s, const char* what) {
  if (s.size() < 3 || s.back() != 2) {
    throw DimensionError(std::string(what) + ": expected trailing axis of extent 2, got shape " + shape_str(s));
  }
  return Shape(s.begin(), s.end() - 1);
}

}  // namespace

Tensor irfft2_packed(const Tensor& xh, std::int64_t width) {
  const Shape cshape = drop_pair_axis(xh.shape(), "irfft2_packed");
  const SpatialDims d = split_spatial(cshape, "irfft2_packed");
  check_half_tail(cshape, width, "irfft2_packed");
  Tensor out{with_tail(cshape, d.h, width)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    irfft2_slice(xh.data() + 2 * b * d.h * d.w, d.h, width, out.data() + b * d.h * width);
  }
  return out;
}

Tensor rfft2_packed_adjoint(const Tensor& grad_half, std::int64_t width) {
  const Shape cshape = drop_pair_axis(grad_half.shape(), "rfft2_packed_adjoint");
  const SpatialDims d = split_spatial(cshape, "rfft2_packed_adjoint");
  check_half_tail(cshape, width, "rfft2_packed_adjoint");
  Tensor out{with_tail(cshape, d.h, width)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    rfft2_adjoint_slice(grad_half.data() + 2 * b * d.h * d.w, d.h, width, out.data() + b * d.h * width);
  }
  return out;
}

Tensor irfft2_packed_adjoint(const Tensor& grad_real) {
  const SpatialDims d = split_spatial(grad_real.shape(), "irfft2_packed_adjoint");
  const std::int64_t wh = d.w / 2 + 1;
  Shape out_shape = with_tail(grad_real.shape(), d.h, wh);
  out_shape.push_back(2);
  Tensor out{std::move(out_shape)};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    irfft2_adjoint_slice(grad_real.data() + b * d.h * d.w, d.h, d.w, out.data() + 2 * b * d.h * wh);
  }
  return out;
}

}  // namespace mafnet
