#include "mafnet/linalg.hpp"
#include "mafnet/ops.hpp"

namespace mafnet {

namespace {

// Raw accumulating kernels for the batched products; callers pass zeroed
// output buffers.
void mm_nn_acc(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
               std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m,k] += g[m,n] * b[k,n]^T
void mm_nt_acc(const double* g, const double* b, double* c, std::int64_t m, std::int64_t n,
               std::int64_t k) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    double* crow = c + i * k;
    for (std::int64_t j = 0; j < k; ++j) {
      const double* brow = b + j * n;
      double acc = 0.0;
      for (std::int64_t p = 0; p < n; ++p) acc += grow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// c[k,n] += a[m,k]^T * g[m,n]
void mm_tn_acc(const double* a, const double* g, double* c, std::int64_t m, std::int64_t k,
               std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

struct BmmDims {
  std::int64_t batch;
  std::int64_t m;
  std::int64_t k;
  std::int64_t n;
  bool a_shared;  // rank-2 a reused across the batch
  bool b_shared;
};

BmmDims bmm_dims(const Tensor& a, const Tensor& b) {
  BmmDims d{};
  if (a.rank() == 3 && b.rank() == 3) {
    if (a.dim(0) != b.dim(0)) {
      throw DimensionError("bmm: batch extents differ, " + shape_str(a.shape()) + " x " +
                           shape_str(b.shape()));
    }
    d.batch = a.dim(0);
  } else if (a.rank() == 2 && b.rank() == 3) {
    d.batch = b.dim(0);
    d.a_shared = true;
  } else if (a.rank() == 3 && b.rank() == 2) {
    d.batch = a.dim(0);
    d.b_shared = true;
  } else {
    throw DimensionError("bmm: expected rank-3 operands (rank-2 broadcasts), got " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  d.m = a.dim(a.rank() - 2);
  d.k = a.dim(a.rank() - 1);
  if (b.dim(b.rank() - 2) != d.k) {
    throw DimensionError("bmm: inner extents differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  d.n = b.dim(b.rank() - 1);
  return d;
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tensor v = matmul_nn(a->value, b->value);
  return make_op("matmul", std::move(v), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) accumulate_grad(*a, matmul_nt(self.grad, b->value), "matmul");
    if (b->requires_grad) accumulate_grad(*b, matmul_tn(a->value, self.grad), "matmul");
  });
}

Var bmm(const Var& a, const Var& b) {
  const BmmDims d = bmm_dims(a->value, b->value);
  Tensor v{Shape{d.batch, d.m, d.n}};
  for (std::int64_t i = 0; i < d.batch; ++i) {
    const double* ap = a->value.data() + (d.a_shared ? 0 : i * d.m * d.k);
    const double* bp = b->value.data() + (d.b_shared ? 0 : i * d.k * d.n);
    mm_nn_acc(ap, bp, v.data() + i * d.m * d.n, d.m, d.k, d.n);
  }
  return make_op("bmm", std::move(v), {a, b}, [a, b, d](Node& self) {
    if (a->requires_grad) {
      Tensor ga{a->value.shape()};
      for (std::int64_t i = 0; i < d.batch; ++i) {
        const double* gp = self.grad.data() + i * d.m * d.n;
        const double* bp = b->value.data() + (d.b_shared ? 0 : i * d.k * d.n);
        mm_nt_acc(gp, bp, ga.data() + (d.a_shared ? 0 : i * d.m * d.k), d.m, d.n, d.k);
      }
      accumulate_grad(*a, ga, "bmm");
    }
    if (b->requires_grad) {
      Tensor gb{b->value.shape()};
      for (std::int64_t i = 0; i < d.batch; ++i) {
        const double* ap = a->value.data() + (d.a_shared ? 0 : i * d.m * d.k);
        const double* gp = self.grad.data() + i * d.m * d.n;
        mm_tn_acc(ap, gp, gb.data() + (d.b_shared ? 0 : i * d.k * d.n), d.m, d.k, d.n);
      }
      accumulate_grad(*b, gb, "bmm");
    }
  });
}

}  // namespace mafnet
