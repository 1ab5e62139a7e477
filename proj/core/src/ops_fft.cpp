#include "mafnet/fft.hpp"
#include "mafnet/ops.hpp"

namespace mafnet {

Var rfft2_op(const Var& x) {
  const Shape& s = x->value.shape();
  if (s.size() < 2) throw DimensionError("rfft2_op: need rank >= 2, got " + shape_str(s));
  const std::int64_t width = s[s.size() - 1];
  Tensor v = rfft2_packed(x->value);
  return make_op("rfft2", std::move(v), {x}, [x, width](Node& self) {
    accumulate_grad(*x, rfft2_packed_adjoint(self.grad, width), "rfft2");
  });
}

Var irfft2_op(const Var& xh, std::int64_t width) {
  Tensor v = irfft2_packed(xh->value, width);
  return make_op("irfft2", std::move(v), {xh}, [xh](Node& self) {
    accumulate_grad(*xh, irfft2_packed_adjoint(self.grad), "irfft2");
  });
}

}  // namespace mafnet
