#include "mafnet/ops.hpp"

namespace mafnet {

namespace {

// Smallest o >= 0 with o*stride + kk - pad >= 0.
inline std::int64_t lo_index(std::int64_t pad, std::int64_t kk, std::int64_t stride) {
  const std::int64_t t = pad - kk;
  return t <= 0 ? 0 : (t + stride - 1) / stride;
}

// Largest o with o*stride + kk - pad <= limit - 1 (may be -1: empty range).
inline std::int64_t hi_index(std::int64_t limit, std::int64_t pad, std::int64_t kk,
                             std::int64_t stride) {
  const std::int64_t t = limit - 1 + pad - kk;
  return t < 0 ? -1 : t / stride;
}

struct ConvDims {
  std::int64_t batch, ci, h, w;
  std::int64_t co, kh, kw;
  std::int64_t ho, wo;
};

ConvDims conv_dims(const Tensor& x, const Tensor& wt, const Var& bias, int stride, int pad,
                   bool transposed, const char* op) {
  if (x.rank() != 4) throw DimensionError(std::string(op) + ": input must be [B,C,H,W], got " + shape_str(x.shape()));
  if (wt.rank() != 4) throw DimensionError(std::string(op) + ": weight must be rank 4, got " + shape_str(wt.shape()));
  if (stride < 1) throw ContractError(std::string(op) + ": stride must be >= 1");
  if (pad < 0) throw ContractError(std::string(op) + ": pad must be >= 0");
  ConvDims d{};
  d.batch = x.dim(0);
  d.ci = x.dim(1);
  d.h = x.dim(2);
  d.w = x.dim(3);
  const std::int64_t w_in = transposed ? wt.dim(0) : wt.dim(1);
  d.co = transposed ? wt.dim(1) : wt.dim(0);
  d.kh = wt.dim(2);
  d.kw = wt.dim(3);
  if (w_in != d.ci) {
    throw DimensionError(std::string(op) + ": weight expects " + std::to_string(w_in) +
                         " input channels, input has " + std::to_string(d.ci));
  }
  if (transposed) {
    d.ho = (d.h - 1) * stride - 2 * pad + d.kh;
    d.wo = (d.w - 1) * stride - 2 * pad + d.kw;
  } else {
    d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
    d.wo = (d.w + 2 * pad - d.kw) / stride + 1;
  }
  const bool fits = transposed ? (d.ho >= 1 && d.wo >= 1)
                               : (d.h + 2 * pad >= d.kh && d.w + 2 * pad >= d.kw);
  if (!fits || d.ho < 1 || d.wo < 1) {
    throw DimensionError(std::string(op) + ": kernel " + std::to_string(d.kh) + "x" +
                         std::to_string(d.kw) + " does not fit input " + shape_str(x.shape()) +
                         " with pad " + std::to_string(pad));
  }
  if (bias && !(bias->value.rank() == 1 && bias->value.dim(0) == d.co)) {
    throw DimensionError(std::string(op) + ": bias must be [" + std::to_string(d.co) + "], got " +
                         shape_str(bias->value.shape()));
  }
  return d;
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int pad) {
  const ConvDims d = conv_dims(x->value, w->value, bias, stride, pad, false, "conv2d");
  const std::int64_t s = stride, p = pad;
  Tensor out{Shape{d.batch, d.co, d.ho, d.wo}};
  if (bias) {
    for (std::int64_t b = 0; b < d.batch; ++b) {
      for (std::int64_t co = 0; co < d.co; ++co) {
        double* plane = out.data() + (b * d.co + co) * d.ho * d.wo;
        const double bv = bias->value[co];
        for (std::int64_t i = 0; i < d.ho * d.wo; ++i) plane[i] = bv;
      }
    }
  }
  for (std::int64_t b = 0; b < d.batch; ++b) {
    for (std::int64_t co = 0; co < d.co; ++co) {
      double* oplane = out.data() + (b * d.co + co) * d.ho * d.wo;
      for (std::int64_t ci = 0; ci < d.ci; ++ci) {
        const double* xplane = x->value.data() + (b * d.ci + ci) * d.h * d.w;
        const double* wk = w->value.data() + (co * d.ci + ci) * d.kh * d.kw;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
          const std::int64_t oy_lo = lo_index(p, ky, s), oy_hi = hi_index(d.h, p, ky, s);
          for (std::int64_t kx = 0; kx < d.kw; ++kx) {
            const double wv = wk[ky * d.kw + kx];
            if (wv == 0.0) continue;
            const std::int64_t ox_lo = lo_index(p, kx, s), ox_hi = hi_index(d.w, p, kx, s);
            for (std::int64_t oy = oy_lo; oy <= oy_hi && oy < d.ho; ++oy) {
              const double* xrow = xplane + (oy * s - p + ky) * d.w;
              double* orow = oplane + oy * d.wo;
              std::int64_t ix = ox_lo * s - p + kx;
              for (std::int64_t ox = ox_lo; ox <= ox_hi && ox < d.wo; ++ox, ix += s) {
                orow[ox] += wv * xrow[ix];
              }
            }
          }
        }
      }
    }
  }
  std::vector<Var> parents = bias ? std::vector<Var>{x, w, bias} : std::vector<Var>{x, w};
  return make_op("conv2d", std::move(out), std::move(parents), [x, w, bias, d, s, p](Node& self) {
    const bool need_x = x->requires_grad;
    const bool need_w = w->requires_grad;
    Tensor gx = need_x ? Tensor{x->value.shape()} : Tensor{};
    Tensor gw = need_w ? Tensor{w->value.shape()} : Tensor{};
    for (std::int64_t b = 0; b < d.batch; ++b) {
      for (std::int64_t co = 0; co < d.co; ++co) {
        const double* gplane = self.grad.data() + (b * d.co + co) * d.ho * d.wo;
        for (std::int64_t ci = 0; ci < d.ci; ++ci) {
          const double* xplane = x->value.data() + (b * d.ci + ci) * d.h * d.w;
          double* gxplane = need_x ? gx.data() + (b * d.ci + ci) * d.h * d.w : nullptr;
          const double* wk = w->value.data() + (co * d.ci + ci) * d.kh * d.kw;
          double* gwk = need_w ? gw.data() + (co * d.ci + ci) * d.kh * d.kw : nullptr;
          for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            const std::int64_t oy_lo = lo_index(p, ky, s), oy_hi = hi_index(d.h, p, ky, s);
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
              const double wv = wk[ky * d.kw + kx];
              const std::int64_t ox_lo = lo_index(p, kx, s), ox_hi = hi_index(d.w, p, kx, s);
              double wacc = 0.0;
              for (std::int64_t oy = oy_lo; oy <= oy_hi && oy < d.ho; ++oy) {
                const std::int64_t iy = oy * s - p + ky;
                const double* grow = gplane + oy * d.wo;
                const double* xrow = xplane + iy * d.w;
                double* gxrow = need_x ? gxplane + iy * d.w : nullptr;
                std::int64_t ix = ox_lo * s - p + kx;
                for (std::int64_t ox = ox_lo; ox <= ox_hi && ox < d.wo; ++ox, ix += s) {
                  const double g = grow[ox];
                  if (need_x) gxrow[ix] += g * wv;
                  wacc += g * xrow[ix];
                }
              }
              if (need_w) gwk[ky * d.kw + kx] += wacc;
            }
          }
        }
      }
    }
    if (need_x) accumulate_grad(*x, gx, "conv2d");
    if (need_w) accumulate_grad(*w, gw, "conv2d");
    if (bias && bias->requires_grad) {
      Tensor gb{bias->value.shape()};
      for (std::int64_t b = 0; b < d.batch; ++b) {
        for (std::int64_t co = 0; co < d.co; ++co) {
          const double* gplane = self.grad.data() + (b * d.co + co) * d.ho * d.wo;
          double acc = 0.0;
          for (std::int64_t i = 0; i < d.ho * d.wo; ++i) acc += gplane[i];
          gb[co] += acc;
        }
      }
      accumulate_grad(*bias, gb, "conv2d");
    }
  });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int pad) {
  const ConvDims d = conv_dims(x->value, w->value, bias, stride, pad, true, "conv_transpose2d");
  const std::int64_t s = stride, p = pad;
  Tensor out{Shape{d.batch, d.co, d.ho, d.wo}};
  if (bias) {
    for (std::int64_t b = 0; b < d.batch; ++b) {
      for (std::int64_t co = 0; co < d.co; ++co) {
        double* plane = out.data() + (b * d.co + co) * d.ho * d.wo;
        const double bv = bias->value[co];
        for (std::int64_t i = 0; i < d.ho * d.wo; ++i) plane[i] = bv;
      }
    }
  }
  for (std::int64_t b = 0; b < d.batch; ++b) {
    for (std::int64_t ci = 0; ci < d.ci; ++ci) {
      const double* xplane = x->value.data() + (b * d.ci + ci) * d.h * d.w;
      for (std::int64_t co = 0; co < d.co; ++co) {
        double* oplane = out.data() + (b * d.co + co) * d.ho * d.wo;
        const double* wk = w->value.data() + (ci * d.co + co) * d.kh * d.kw;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
          const std::int64_t iy_lo = lo_index(p, ky, s), iy_hi = hi_index(d.ho, p, ky, s);
          for (std::int64_t kx = 0; kx < d.kw; ++kx) {
            const double wv = wk[ky * d.kw + kx];
            if (wv == 0.0) continue;
            const std::int64_t ix_lo = lo_index(p, kx, s), ix_hi = hi_index(d.wo, p, kx, s);
            for (std::int64_t iy = iy_lo; iy <= iy_hi && iy < d.h; ++iy) {
              const double* xrow = xplane + iy * d.w;
              double* orow = oplane + (iy * s - p + ky) * d.wo;
              std::int64_t ox = ix_lo * s - p + kx;
              for (std::int64_t ix = ix_lo; ix <= ix_hi && ix < d.w; ++ix, ox += s) {
                orow[ox] += wv * xrow[ix];
              }
            }
          }
        }
      }
    }
  }
  std::vector<Var> parents = bias ? std::vector<Var>{x, w, bias} : std::vector<Var>{x, w};
  return make_op("conv_transpose2d", std::move(out), std::move(parents),
                 [x, w, bias, d, s, p](Node& self) {
    const bool need_x = x->requires_grad;
    const bool need_w = w->requires_grad;
    Tensor gx = need_x ? Tensor{x->value.shape()} : Tensor{};
    Tensor gw = need_w ? Tensor{w->value.shape()} : Tensor{};
    for (std::int64_t b = 0; b < d.batch; ++b) {
      for (std::int64_t ci = 0; ci < d.ci; ++ci) {
        const double* xplane = x->value.data() + (b * d.ci + ci) * d.h * d.w;
        double* gxplane = need_x ? gx.data() + (b * d.ci + ci) * d.h * d.w : nullptr;
        for (std::int64_t co = 0; co < d.co; ++co) {
          const double* gplane = self.grad.data() + (b * d.co + co) * d.ho * d.wo;
          const double* wk = w->value.data() + (ci * d.co + co) * d.kh * d.kw;
          double* gwk = need_w ? gw.data() + (ci * d.co + co) * d.kh * d.kw : nullptr;
          for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            const std::int64_t iy_lo = lo_index(p, ky, s), iy_hi = hi_index(d.ho, p, ky, s);
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
              const double wv = wk[ky * d.kw + kx];
              const std::int64_t ix_lo = lo_index(p, kx, s), ix_hi = hi_index(d.wo, p, kx, s);
              double wacc = 0.0;
              for (std::int64_t iy = iy_lo; iy <= iy_hi && iy < d.h; ++iy) {
                const double* xrow = xplane + iy * d.w;
                double* gxrow = need_x ? gxplane + iy * d.w : nullptr;
                const double* grow = gplane + (iy * s - p + ky) * d.wo;
                std::int64_t ox = ix_lo * s - p + kx;
                for (std::int64_t ix = ix_lo; ix <= ix_hi && ix < d.w; ++ix, ox += s) {
                  const double g = grow[ox];
                  if (need_x) gxrow[ix] += g * wv;
                  wacc += g * xrow[ix];
                }
              }
              if (need_w) gwk[ky * d.kw + kx] += wacc;
            }
          }
        }
      }
    }
    if (need_x) accumulate_grad(*x, gx, "conv_transpose2d");
    if (need_w) accumulate_grad(*w, gw, "conv_transpose2d");
    if (bias && bias->requires_grad) {
      Tensor gb{bias->value.shape()};
      for (std::int64_t b = 0; b < d.batch; ++b) {
        for (std::int64_t co = 0; co < d.co; ++co) {
          const double* gplane = self.grad.data() + (b * d.co + co) * d.ho * d.wo;
          double acc = 0.0;
          for (std::int64_t i = 0; i < d.ho * d.wo; ++i) acc += gplane[i];
          gb[co] += acc;
        }
      }
      accumulate_grad(*bias, gb, "conv_transpose2d");
    }
  });
}

}  // namespace mafnet
