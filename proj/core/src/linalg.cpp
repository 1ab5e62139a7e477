#include "mafnet/linalg.hpp"

#include <cmath>

namespace mafnet {

namespace {

void check_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 operand, got " + shape_str(t.shape()));
  }
}

}  // namespace

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul_nn");
  check_rank2(b, "matmul_nn");
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul_nn: inner extents differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  Tensor c{Shape{m, n}};
  for (std::int64_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    const double* arow = a.data() + i * k;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul_nt");
  check_rank2(b, "matmul_nt");
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw DimensionError("matmul_nt: inner extents differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + "^T");
  }
  Tensor c{Shape{m, n}};
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * n;
    for (std::int64_t j = 0; j < n; ++j) {
      const double* brow = b.data() + j * k;
      double acc = 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul_tn");
  check_rank2(b, "matmul_tn");
  const std::int64_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul_tn: inner extents differ, " + shape_str(a.shape()) + "^T x " +
                         shape_str(b.shape()));
  }
  Tensor c{Shape{m, n}};
  for (std::int64_t p = 0; p < k; ++p) {
    const double* arow = a.data() + p * m;
    const double* brow = b.data() + p * n;
    for (std::int64_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.data() + i * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void softmax_last_inplace(Tensor& t) {
  if (t.rank() < 1) throw DimensionError("softmax_last_inplace: need rank >= 1");
  const std::int64_t n = t.dim(-1);
  const std::int64_t rows = t.size() / n;
  for (std::int64_t r = 0; r < rows; ++r) {
    double* row = t.data() + r * n;
    double mx = row[0];
    for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (std::int64_t j = 0; j < n; ++j) row[j] *= inv;
  }
}

}  // namespace mafnet
