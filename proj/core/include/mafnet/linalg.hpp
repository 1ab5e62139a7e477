#pragma once

#include "mafnet/tensor.hpp"

namespace mafnet {

// Plain rank-2 products used by the graph ops' backward passes and by the
// non-differentiable reference paths (oracles, benchmarks).
Tensor matmul_nn(const Tensor& a, const Tensor& b);  // [m,k] x [k,n] -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T -> [m,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // [k,m]^T x [k,n] -> [m,n]

// Softmax over the last axis, any rank.
void softmax_last_inplace(Tensor& t);

}  // namespace mafnet
