#include "mafnet/cost_volume.hpp"

namespace mafnet {

namespace {

struct GwcDims {
  std::int64_t batch, nc, h4, w4, ng, cpg, d4;
  double scale;
};

GwcDims gwc_dims(const Tensor& f_l, const Tensor& f_r, std::int64_t dmax4, std::int64_t ng) {
  if (f_l.rank() != 4 || f_r.rank() != 4) {
    throw DimensionError("build_gwc: features must be [B,Nc,H4,W4], got " +
                         shape_str(f_l.shape()) + " and " + shape_str(f_r.shape()));
  }
  if (f_l.shape() != f_r.shape()) {
    throw DimensionError("build_gwc: left " + shape_str(f_l.shape()) + " and right " +
                         shape_str(f_r.shape()) + " shapes differ");
  }
  GwcDims d{};
  d.batch = f_l.dim(0);
  d.nc = f_l.dim(1);
  d.h4 = f_l.dim(2);
  d.w4 = f_l.dim(3);
  d.ng = ng;
  d.d4 = dmax4;
  if (ng < 1 || d.nc % ng != 0) {
    throw ConfigError("build_gwc: channel count " + std::to_string(d.nc) +
                      " not divisible into " + std::to_string(ng) + " groups");
  }
  if (dmax4 < 1 || dmax4 > d.w4) {
    throw ConfigError("build_gwc: disparity candidate count " + std::to_string(dmax4) +
                      " exceeds feature width " + std::to_string(d.w4));
  }
  d.cpg = d.nc / ng;
  d.scale = static_cast<double>(ng) / static_cast<double>(d.nc);
  return d;
}

// out(b,g,d,y,x) += scale * sum_c fl(ch,y,x) * fr(ch,y,x-d), the shared
// forward kernel. When accumulating gradients the same loop structure runs
// with the roles swapped.
void gwc_forward(const Tensor& fl, const Tensor& fr, const GwcDims& d, Tensor& out) {
  for (std::int64_t b = 0; b < d.batch; ++b) {
    for (std::int64_t g = 0; g < d.ng; ++g) {
      for (std::int64_t c = 0; c < d.cpg; ++c) {
        const std::int64_t ch = g * d.cpg + c;
        for (std::int64_t y = 0; y < d.h4; ++y) {
          const double* flr = fl.data() + ((b * d.nc + ch) * d.h4 + y) * d.w4;
          const double* frr = fr.data() + ((b * d.nc + ch) * d.h4 + y) * d.w4;
          for (std::int64_t dd = 0; dd < d.d4; ++dd) {
            double* orow = out.data() + (((b * d.ng + g) * d.d4 + dd) * d.h4 + y) * d.w4;
            for (std::int64_t x = dd; x < d.w4; ++x) {
              orow[x] += d.scale * flr[x] * frr[x - dd];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor gwc_oracle(const Tensor& f_l, const Tensor& f_r, std::int64_t dmax4, std::int64_t ng) {
  const GwcDims d = gwc_dims(f_l, f_r, dmax4, ng);
  Tensor out{Shape{d.batch, d.ng, d.d4, d.h4, d.w4}};
  for (std::int64_t b = 0; b < d.batch; ++b) {
    for (std::int64_t g = 0; g < d.ng; ++g) {
      for (std::int64_t dd = 0; dd < d.d4; ++dd) {
        for (std::int64_t y = 0; y < d.h4; ++y) {
          for (std::int64_t x = 0; x < d.w4; ++x) {
            double acc = 0.0;
            if (x >= dd) {
              for (std::int64_t c = 0; c < d.cpg; ++c) {
                const std::int64_t ch = g * d.cpg + c;
                acc += f_l.at({b, ch, y, x}) * f_r.at({b, ch, y, x - dd});
              }
              acc *= d.scale;
            }
            out.at({b, g, dd, y, x}) = acc;
          }
        }
      }
    }
  }
  return out;
}

CostVolume build_gwc(const Var& f_l, const Var& f_r, std::int64_t dmax4, std::int64_t ng) {
  const GwcDims d = gwc_dims(f_l->value, f_r->value, dmax4, ng);
  Tensor out{Shape{d.batch, d.ng, d.d4, d.h4, d.w4}};
  gwc_forward(f_l->value, f_r->value, d, out);
  Var v = make_op("build_gwc", std::move(out), {f_l, f_r}, [f_l, f_r, d](Node& self) {
    const bool need_l = f_l->requires_grad;
    const bool need_r = f_r->requires_grad;
    Tensor gl = need_l ? Tensor{f_l->value.shape()} : Tensor{};
    Tensor gr = need_r ? Tensor{f_r->value.shape()} : Tensor{};
    for (std::int64_t b = 0; b < d.batch; ++b) {
      for (std::int64_t g = 0; g < d.ng; ++g) {
        for (std::int64_t c = 0; c < d.cpg; ++c) {
          const std::int64_t ch = g * d.cpg + c;
          for (std::int64_t y = 0; y < d.h4; ++y) {
            const std::int64_t frow = ((b * d.nc + ch) * d.h4 + y) * d.w4;
            const double* flr = f_l->value.data() + frow;
            const double* frr = f_r->value.data() + frow;
            double* glr = need_l ? gl.data() + frow : nullptr;
            double* grr = need_r ? gr.data() + frow : nullptr;
            for (std::int64_t dd = 0; dd < d.d4; ++dd) {
              const double* grow = self.grad.data() + (((b * d.ng + g) * d.d4 + dd) * d.h4 + y) * d.w4;
              for (std::int64_t x = dd; x < d.w4; ++x) {
                const double gv = d.scale * grow[x];
                if (need_l) glr[x] += gv * frr[x - dd];
                if (need_r) grr[x - dd] += gv * flr[x];
              }
            }
          }
        }
      }
    }
    if (need_l) accumulate_grad(*f_l, gl, "build_gwc");
    if (need_r) accumulate_grad(*f_r, gr, "build_gwc");
  });
  return CostVolume{std::move(v), 4 * dmax4};
}

Var mean_over_groups(const CostVolume& cv) {
  const std::int64_t ng = cv.grouped->value.dim(1);
  return mul_scalar(reduce_sum(cv.grouped, 1, /*keepdims=*/false), 1.0 / static_cast<double>(ng));
}

}  // namespace mafnet
