#include <algorithm>
#include <cmath>
#include <utility>

#include "mafnet/ops.hpp"

namespace mafnet {

namespace {

int norm_axis(int axis, int rank, const char* op) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  return a;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const std::int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const std::int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                           " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// Row-major strides of `s` viewed against the (broadcast) shape `out`,
// right-aligned; broadcast axes get stride 0.
std::vector<std::int64_t> aligned_strides(const Shape& s, const Shape& out, const char* op) {
  if (s.size() > out.size()) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(s) + " does not broadcast to " +
                         shape_str(out));
  }
  std::vector<std::int64_t> own(s.size());
  std::int64_t acc = 1;
  for (std::size_t i = s.size(); i-- > 0;) {
    own[i] = acc;
    acc *= s[i];
  }
  std::vector<std::int64_t> st(out.size(), 0);
  const std::size_t off = out.size() - s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == out[off + i]) {
      st[off + i] = own[i];
    } else if (s[i] == 1) {
      st[off + i] = 0;
    } else {
      throw DimensionError(std::string(op) + ": shape " + shape_str(s) + " does not broadcast to " +
                           shape_str(out));
    }
  }
  return st;
}

template <class F>
Tensor ew_map2(const Tensor& a, const Tensor& b, F f, const char* op) {
  if (same_shape(a, b)) {
    Tensor out{a.shape()};
    for (std::int64_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
  }
  const Shape os = broadcast_shape(a.shape(), b.shape(), op);
  Tensor out{os};
  const int rank = static_cast<int>(os.size());
  if (out.size() == 0) return out;
  if (rank == 0) {
    out[0] = f(a[0], b[0]);
    return out;
  }
  const auto sa = aligned_strides(a.shape(), os, op);
  const auto sb = aligned_strides(b.shape(), os, op);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t offa = 0, offb = 0;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = f(a[offa], b[offb]);
    for (int ax = rank - 1; ax >= 0; --ax) {
      ++idx[static_cast<std::size_t>(ax)];
      offa += sa[static_cast<std::size_t>(ax)];
      offb += sb[static_cast<std::size_t>(ax)];
      if (idx[static_cast<std::size_t>(ax)] < os[static_cast<std::size_t>(ax)]) break;
      idx[static_cast<std::size_t>(ax)] = 0;
      offa -= sa[static_cast<std::size_t>(ax)] * os[static_cast<std::size_t>(ax)];
      offb -= sb[static_cast<std::size_t>(ax)] * os[static_cast<std::size_t>(ax)];
    }
  }
  return out;
}

template <class F>
Tensor ew_map1(const Tensor& a, F f) {
  Tensor out{a.shape()};
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

struct AxisSpan {
  std::int64_t outer;
  std::int64_t n;
  std::int64_t inner;
};

AxisSpan axis_span(const Shape& s, int axis) {
  AxisSpan sp{1, s[static_cast<std::size_t>(axis)], 1};
  for (int i = 0; i < axis; ++i) sp.outer *= s[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

double sigmoid_stable(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor reduce_to_shape(const Tensor& g, const Shape& target) {
  if (g.shape() == target) return g;
  Tensor out{target};
  if (g.size() == 0) return out;
  const int rank = g.rank();
  const auto st = aligned_strides(target, g.shape(), "reduce_to_shape");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t offt = 0;
  const Shape& gs = g.shape();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    out[offt] += g[i];
    for (int ax = rank - 1; ax >= 0; --ax) {
      ++idx[static_cast<std::size_t>(ax)];
      offt += st[static_cast<std::size_t>(ax)];
      if (idx[static_cast<std::size_t>(ax)] < gs[static_cast<std::size_t>(ax)]) break;
      idx[static_cast<std::size_t>(ax)] = 0;
      offt -= st[static_cast<std::size_t>(ax)] * gs[static_cast<std::size_t>(ax)];
    }
  }
  return out;
}

Var constant(Tensor t) { return make_leaf(std::move(t)); }

Var add(const Var& a, const Var& b) {
  Tensor v = ew_map2(a->value, b->value, [](double x, double y) { return x + y; }, "add");
  return make_op("add", std::move(v), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) accumulate_grad(*a, reduce_to_shape(self.grad, a->value.shape()), "add");
    if (b->requires_grad) accumulate_grad(*b, reduce_to_shape(self.grad, b->value.shape()), "add");
  });
}

Var sub(const Var& a, const Var& b) {
  Tensor v = ew_map2(a->value, b->value, [](double x, double y) { return x - y; }, "sub");
  return make_op("sub", std::move(v), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) accumulate_grad(*a, reduce_to_shape(self.grad, a->value.shape()), "sub");
    if (b->requires_grad) {
      Tensor gb = ew_map1(self.grad, [](double g) { return -g; });
      accumulate_grad(*b, reduce_to_shape(gb, b->value.shape()), "sub");
    }
  });
}

Var mul(const Var& a, const Var& b) {
  Tensor v = ew_map2(a->value, b->value, [](double x, double y) { return x * y; }, "mul");
  return make_op("mul", std::move(v), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      Tensor ga = ew_map2(self.grad, b->value, [](double g, double y) { return g * y; }, "mul");
      accumulate_grad(*a, reduce_to_shape(ga, a->value.shape()), "mul");
    }
    if (b->requires_grad) {
      Tensor gb = ew_map2(self.grad, a->value, [](double g, double x) { return g * x; }, "mul");
      accumulate_grad(*b, reduce_to_shape(gb, b->value.shape()), "mul");
    }
  });
}

Var divide(const Var& a, const Var& b) {
  Tensor v = ew_map2(a->value, b->value, [](double x, double y) { return x / y; }, "div");
  return make_op("div", std::move(v), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      Tensor ga = ew_map2(self.grad, b->value, [](double g, double y) { return g / y; }, "div");
      accumulate_grad(*a, reduce_to_shape(ga, a->value.shape()), "div");
    }
    if (b->requires_grad) {
      Tensor t = ew_map2(self.grad, self.value, [](double g, double q) { return g * q; }, "div");
      Tensor gb = ew_map2(t, b->value, [](double gq, double y) { return -gq / y; }, "div");
      accumulate_grad(*b, reduce_to_shape(gb, b->value.shape()), "div");
    }
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor v = ew_map1(a->value, [s](double x) { return x + s; });
  return make_op("add_scalar", std::move(v), {a}, [a](Node& self) {
    accumulate_grad(*a, self.grad, "add_scalar");
  });
}

Var mul_scalar(const Var& a, double s) {
  Tensor v = ew_map1(a->value, [s](double x) { return x * s; });
  return make_op("mul_scalar", std::move(v), {a}, [a, s](Node& self) {
    accumulate_grad(*a, ew_map1(self.grad, [s](double g) { return g * s; }), "mul_scalar");
  });
}

Var neg(const Var& a) { return mul_scalar(a, -1.0); }

Var exp(const Var& a) {
  Tensor v = ew_map1(a->value, [](double x) { return std::exp(x); });
  return make_op("exp", std::move(v), {a}, [a](Node& self) {
    Tensor g = ew_map2(self.grad, self.value, [](double g0, double e) { return g0 * e; }, "exp");
    accumulate_grad(*a, g, "exp");
  });
}

Var sigmoid(const Var& a) {
  Tensor v = ew_map1(a->value, sigmoid_stable);
  return make_op("sigmoid", std::move(v), {a}, [a](Node& self) {
    Tensor g = ew_map2(self.grad, self.value,
                       [](double g0, double y) { return g0 * y * (1.0 - y); }, "sigmoid");
    accumulate_grad(*a, g, "sigmoid");
  });
}

Var leaky_relu(const Var& a, double negative_slope) {
  Tensor v = ew_map1(a->value, [negative_slope](double x) { return x > 0.0 ? x : negative_slope * x; });
  return make_op("leaky_relu", std::move(v), {a}, [a, negative_slope](Node& self) {
    Tensor g{self.value.shape()};
    for (std::int64_t i = 0; i < g.size(); ++i) {
      g[i] = self.grad[i] * (a->value[i] > 0.0 ? 1.0 : negative_slope);
    }
    accumulate_grad(*a, g, "leaky_relu");
  });
}

Var softmax(const Var& a, int axis) {
  const int ax = norm_axis(axis, a->value.rank(), "softmax");
  const AxisSpan sp = axis_span(a->value.shape(), ax);
  Tensor v = a->value;
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    for (std::int64_t i = 0; i < sp.inner; ++i) {
      double* base = v.data() + o * sp.n * sp.inner + i;
      double mx = base[0];
      for (std::int64_t k = 1; k < sp.n; ++k) mx = std::max(mx, base[k * sp.inner]);
      double sum = 0.0;
      for (std::int64_t k = 0; k < sp.n; ++k) {
        double& e = base[k * sp.inner];
        e = std::exp(e - mx);
        sum += e;
      }
      const double inv = 1.0 / sum;
      for (std::int64_t k = 0; k < sp.n; ++k) base[k * sp.inner] *= inv;
    }
  }
  return make_op("softmax", std::move(v), {a}, [a, sp](Node& self) {
    Tensor g{self.value.shape()};
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      for (std::int64_t i = 0; i < sp.inner; ++i) {
        const std::int64_t base = o * sp.n * sp.inner + i;
        double dot = 0.0;
        for (std::int64_t k = 0; k < sp.n; ++k) {
          const std::int64_t p = base + k * sp.inner;
          dot += self.grad[p] * self.value[p];
        }
        for (std::int64_t k = 0; k < sp.n; ++k) {
          const std::int64_t p = base + k * sp.inner;
          g[p] = self.value[p] * (self.grad[p] - dot);
        }
      }
    }
    accumulate_grad(*a, g, "softmax");
  });
}

Var reduce_sum(const Var& a, int axis, bool keepdims) {
  const int ax = norm_axis(axis, a->value.rank(), "reduce_sum");
  const AxisSpan sp = axis_span(a->value.shape(), ax);
  Shape os = a->value.shape();
  if (keepdims) {
    os[static_cast<std::size_t>(ax)] = 1;
  } else {
    os.erase(os.begin() + ax);
  }
  Tensor v{os};
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    for (std::int64_t i = 0; i < sp.inner; ++i) {
      double acc = 0.0;
      const double* base = a->value.data() + o * sp.n * sp.inner + i;
      for (std::int64_t k = 0; k < sp.n; ++k) acc += base[k * sp.inner];
      v[o * sp.inner + i] = acc;
    }
  }
  return make_op("reduce_sum", std::move(v), {a}, [a, sp](Node& self) {
    Tensor g{a->value.shape()};
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      for (std::int64_t i = 0; i < sp.inner; ++i) {
        const double gv = self.grad[o * sp.inner + i];
        double* base = g.data() + o * sp.n * sp.inner + i;
        for (std::int64_t k = 0; k < sp.n; ++k) base[k * sp.inner] = gv;
      }
    }
    accumulate_grad(*a, g, "reduce_sum");
  });
}

Var sum_all(const Var& a) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < a->value.size(); ++i) acc += a->value[i];
  return make_op("sum_all", Tensor::scalar(acc), {a}, [a](Node& self) {
    accumulate_grad(*a, Tensor::full(a->value.shape(), self.grad[0]), "sum_all");
  });
}

Var mean_all(const Var& a) {
  if (a->value.size() == 0) throw DimensionError("mean_all: empty input");
  const double inv = 1.0 / static_cast<double>(a->value.size());
  double acc = 0.0;
  for (std::int64_t i = 0; i < a->value.size(); ++i) acc += a->value[i];
  return make_op("mean_all", Tensor::scalar(acc * inv), {a}, [a, inv](Node& self) {
    accumulate_grad(*a, Tensor::full(a->value.shape(), self.grad[0] * inv), "mean_all");
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor v = a->value.reshaped(std::move(shape));
  return make_op("reshape", std::move(v), {a}, [a](Node& self) {
    accumulate_grad(*a, self.grad.reshaped(a->value.shape()), "reshape");
  });
}

namespace {

Tensor permute_tensor(const Tensor& t, const std::vector<int>& perm, const char* op) {
  const int rank = t.rank();
  if (static_cast<int>(perm.size()) != rank) {
    throw DimensionError(std::string(op) + ": permutation size " + std::to_string(perm.size()) +
                         " does not match rank " + std::to_string(rank));
  }
  std::vector<bool> seen(static_cast<std::size_t>(rank), false);
  for (int p : perm) {
    if (p < 0 || p >= rank || seen[static_cast<std::size_t>(p)]) {
      throw DimensionError(std::string(op) + ": invalid permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  Shape os(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) os[static_cast<std::size_t>(i)] = t.dim(perm[static_cast<std::size_t>(i)]);
  Tensor out{os};
  if (out.size() == 0) return out;
  if (rank == 0) {
    out[0] = t[0];
    return out;
  }
  std::vector<std::int64_t> out_strides(static_cast<std::size_t>(rank));
  std::int64_t acc = 1;
  for (int i = rank; i-- > 0;) {
    out_strides[static_cast<std::size_t>(i)] = acc;
    acc *= os[static_cast<std::size_t>(i)];
  }
  // contrib[k]: how much the output offset moves when input axis k increments
  std::vector<std::int64_t> contrib(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) contrib[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = out_strides[static_cast<std::size_t>(i)];
  const Shape& is = t.shape();
  std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t off = 0;
  for (std::int64_t i = 0; i < t.size(); ++i) {
    out[off] = t[i];
    for (int ax = rank - 1; ax >= 0; --ax) {
      ++idx[static_cast<std::size_t>(ax)];
      off += contrib[static_cast<std::size_t>(ax)];
      if (idx[static_cast<std::size_t>(ax)] < is[static_cast<std::size_t>(ax)]) break;
      idx[static_cast<std::size_t>(ax)] = 0;
      off -= contrib[static_cast<std::size_t>(ax)] * is[static_cast<std::size_t>(ax)];
    }
  }
  return out;
}

}  // namespace

Var permute(const Var& a, std::vector<int> perm) {
  Tensor v = permute_tensor(a->value, perm, "permute");
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return make_op("permute", std::move(v), {a}, [a, inv](Node& self) {
    accumulate_grad(*a, permute_tensor(self.grad, inv, "permute"), "permute");
  });
}

Var slice(const Var& a, int axis, std::int64_t start, std::int64_t len) {
  const int ax = norm_axis(axis, a->value.rank(), "slice");
  const Shape& is = a->value.shape();
  const std::int64_t extent = is[static_cast<std::size_t>(ax)];
  if (len < 1 || start < 0 || start + len > extent) {
    throw DimensionError("slice: window [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") out of range for extent " +
                         std::to_string(extent));
  }
  const AxisSpan sp = axis_span(is, ax);
  Shape os = is;
  os[static_cast<std::size_t>(ax)] = len;
  Tensor v{os};
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    const double* src = a->value.data() + (o * sp.n + start) * sp.inner;
    double* dst = v.data() + o * len * sp.inner;
    std::copy(src, src + len * sp.inner, dst);
  }
  return make_op("slice", std::move(v), {a}, [a, sp, start, len](Node& self) {
    Tensor g{a->value.shape()};
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      const double* src = self.grad.data() + o * len * sp.inner;
      double* dst = g.data() + (o * sp.n + start) * sp.inner;
      std::copy(src, src + len * sp.inner, dst);
    }
    accumulate_grad(*a, g, "slice");
  });
}

Var concat(const std::vector<Var>& xs, int axis) {
  if (xs.empty()) throw DimensionError("concat: no inputs");
  const int ax = norm_axis(axis, xs[0]->value.rank(), "concat");
  const Shape& s0 = xs[0]->value.shape();
  std::int64_t total = 0;
  for (const auto& x : xs) {
    const Shape& s = x->value.shape();
    if (s.size() != s0.size()) throw DimensionError("concat: rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != ax && s[i] != s0[i]) {
        throw DimensionError("concat: shape " + shape_str(s) + " incompatible with " + shape_str(s0));
      }
    }
    total += s[static_cast<std::size_t>(ax)];
  }
  Shape os = s0;
  os[static_cast<std::size_t>(ax)] = total;
  const AxisSpan osp = axis_span(os, ax);
  Tensor v{os};
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const auto& x : xs) {
    offsets.push_back(off);
    const std::int64_t e = x->value.dim(ax);
    for (std::int64_t o = 0; o < osp.outer; ++o) {
      const double* src = x->value.data() + o * e * osp.inner;
      double* dst = v.data() + (o * total + off) * osp.inner;
      std::copy(src, src + e * osp.inner, dst);
    }
    off += e;
  }
  std::vector<Var> parents = xs;
  return make_op("concat", std::move(v), std::move(parents),
                 [xs, osp, offsets, total, ax](Node& self) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (!xs[j]->requires_grad) continue;
      const std::int64_t e = xs[j]->value.dim(ax);
      Tensor g{xs[j]->value.shape()};
      for (std::int64_t o = 0; o < osp.outer; ++o) {
        const double* src = self.grad.data() + (o * total + offsets[j]) * osp.inner;
        double* dst = g.data() + o * e * osp.inner;
        std::copy(src, src + e * osp.inner, dst);
      }
      accumulate_grad(*xs[j], g, "concat");
    }
  });
}

}  // namespace mafnet
