#pragma once

#include <complex>
#include <cstdint>

#include "mafnet/tensor.hpp"

namespace mafnet {

// Complex array with interleaved (re, im) storage. shape() describes the
// complex elements; data() holds 2*size() doubles.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()) / 2; }

  std::complex<double> get(std::int64_t i) const {
    return {data_[static_cast<std::size_t>(2 * i)], data_[static_cast<std::size_t>(2 * i + 1)]};
  }
  void set(std::int64_t i, std::complex<double> v) {
    data_[static_cast<std::size_t>(2 * i)] = v.real();
    data_[static_cast<std::size_t>(2 * i + 1)] = v.imag();
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Real-to-complex transform of the last two axes, unnormalized (no 1/n).
// Input [..., H, W] gives [..., H, W/2 + 1]: the redundant Hermitian half of
// each row spectrum is dropped.
ComplexTensor rfft2(const Tensor& x);

// Inverse of rfft2, scaled by 1/(H*W). `width` restores the original W that
// the stored half-spectrum cannot encode on its own. Rebuilds the missing
// columns by Hermitian symmetry and returns the real part.
Tensor irfft2(const ComplexTensor& xh, std::int64_t width);

// Packed variants for the differentiable layer: complex values occupy a
// trailing axis of extent 2, so [..., H, W] <-> [..., H, W/2 + 1, 2].
Tensor rfft2_packed(const Tensor& x);
Tensor irfft2_packed(const Tensor& xh, std::int64_t width);

// Adjoints of the packed maps as real-linear operators; these are what the
// backward passes apply to the incoming cotangents.
Tensor rfft2_packed_adjoint(const Tensor& grad_half, std::int64_t width);
Tensor irfft2_packed_adjoint(const Tensor& grad_real);

}  // namespace mafnet
