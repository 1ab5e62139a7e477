#pragma once

#include <cstdint>
#include <vector>

#include "mafnet/autograd.hpp"

namespace mafnet {

// Gradient-free leaf, for fixed inputs and precomputed masks.
Var constant(Tensor t);

// Elementwise arithmetic with numpy-style broadcasting: shapes align from the
// right, missing leading axes count as 1, each pair of extents must match or
// one of them be 1.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var divide(const Var& a, const Var& b);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return divide(a, b); }

Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var neg(const Var& a);

Var exp(const Var& a);
Var sigmoid(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);
Var softmax(const Var& a, int axis);

Var reduce_sum(const Var& a, int axis, bool keepdims);
Var sum_all(const Var& a);   // rank-0 result
Var mean_all(const Var& a);  // rank-0 result

Var reshape(const Var& a, Shape shape);
Var permute(const Var& a, std::vector<int> perm);
Var slice(const Var& a, int axis, std::int64_t start, std::int64_t len);
Var concat(const std::vector<Var>& xs, int axis);

Var matmul(const Var& a, const Var& b);  // rank-2 x rank-2
// Batched product over leading axis; a rank-2 operand is reused across the
// batch (its gradient sums over it).
Var bmm(const Var& a, const Var& b);

// x [B,Ci,H,W], w [Co,Ci,kh,kw], bias [Co] or null. Zero padding `pad` on all
// sides, square stride.
Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int pad);
// x [B,Ci,H,W], w [Ci,Co,kh,kw], bias [Co] or null.
// Output extent: (in - 1)*stride - 2*pad + k.
Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int pad);

// Differentiable spectra; complex values packed in a trailing axis of extent
// 2, so [..., H, W] <-> [..., H, W/2 + 1, 2].
Var rfft2_op(const Var& x);
Var irfft2_op(const Var& xh, std::int64_t width);

// Sums g down to `target` (which must broadcast to g's shape). This is the
// backward half of broadcasting; exposed for custom fused ops.
Tensor reduce_to_shape(const Tensor& g, const Shape& target);

}  // namespace mafnet
