#include "mafnet/affa.hpp"

#include <cmath>

#include "mafnet/init.hpp"

namespace mafnet {

AffaParams init_affa(std::int64_t channels, Rng& rng) {
  if (channels < 2 || channels % 2 != 0) {
    throw ConfigError("init_affa: channel count must be even and >= 2, got " +
                      std::to_string(channels));
  }
  AffaParams p;
  // sigmoid(0) = 0.5 and exp(log 0.1) = 0.1: starts near the symmetric
  // regime where the subbands tile the spectrum.
  p.tau_low_raw = scalar_param(0.0, "affa.tau_low_raw");
  p.tau_high_raw = scalar_param(0.0, "affa.tau_high_raw");
  p.gamma_raw = scalar_param(std::log(0.1), "affa.gamma_raw");
  p.gate_w = fan_in_param({2, 2 * channels, 1, 1}, 2 * channels, rng, "affa.gate_w");
  p.gate_b = zeros_param({2}, "affa.gate_b");
  const double rect_gain = std::sqrt(2.0 / 1.01);  // matches the leaky slope 0.1
  p.attn_w1 = fan_in_param({channels / 2, channels, 3, 3}, channels * 9, rng, "affa.attn_w1",
                           rect_gain);
  p.attn_b1 = zeros_param({channels / 2}, "affa.attn_b1");
  p.attn_w2 = fan_in_param({1, channels / 2, 3, 3}, (channels / 2) * 9, rng, "affa.attn_w2");
  p.attn_b2 = zeros_param({1}, "affa.attn_b2");
  return p;
}

std::vector<std::pair<std::string, Var>> affa_param_list(const AffaParams& p) {
  return {
      {"affa.tau_low_raw", p.tau_low_raw}, {"affa.tau_high_raw", p.tau_high_raw},
      {"affa.gamma_raw", p.gamma_raw},     {"affa.gate_w", p.gate_w},
      {"affa.gate_b", p.gate_b},           {"affa.attn_w1", p.attn_w1},
      {"affa.attn_b1", p.attn_b1},         {"affa.attn_w2", p.attn_w2},
      {"affa.attn_b2", p.attn_b2},
  };
}

Var tau_low_of(const AffaParams& p) { return sigmoid(p.tau_low_raw); }
Var tau_high_of(const AffaParams& p) { return sigmoid(p.tau_high_raw); }
Var gamma_of(const AffaParams& p) { return exp(p.gamma_raw); }

Tensor radial_grid(std::int64_t h, std::int64_t w) {
  if (h < 2 || w < 2) {
    throw DimensionError("radial_grid: extents must be >= 2, got " + std::to_string(h) + "x" +
                         std::to_string(w));
  }
  const std::int64_t wh = w / 2 + 1;
  Tensor r{Shape{h, wh}};
  for (std::int64_t u = 0; u < h; ++u) {
    const double fu = static_cast<double>(std::min(u, h - u)) / (static_cast<double>(h) / 2.0);
    for (std::int64_t v = 0; v < wh; ++v) {
      const double fv = static_cast<double>(v) / (static_cast<double>(w) / 2.0);
      r.at({u, v}) = std::sqrt((fu * fu + fv * fv) * 0.5);
    }
  }
  return r;
}

std::pair<Var, Var> soft_masks(const Tensor& grid, const AffaParams& p) {
  const Var r = constant(grid);
  const Var gamma = gamma_of(p);
  const Var m_low = sigmoid(divide(sub(tau_low_of(p), r), gamma));
  const Var m_high = sigmoid(divide(sub(r, tau_high_of(p)), gamma));
  return {m_low, m_high};
}

std::pair<Var, Var> decompose(const Var& x, const Var& m_low, const Var& m_high) {
  const Shape& s = x->value.shape();
  if (s.size() < 2) throw DimensionError("decompose: need rank >= 2, got " + shape_str(s));
  const std::int64_t h = s[s.size() - 2], w = s[s.size() - 1];
  const std::int64_t wh = w / 2 + 1;
  for (const Var& m : {m_low, m_high}) {
    const Shape& ms = m->value.shape();
    if (ms.size() != 2 || ms[0] != h || ms[1] != wh) {
      throw DimensionError("decompose: mask " + shape_str(ms) + " does not match half-spectrum [" +
                           std::to_string(h) + ", " + std::to_string(wh) + "]");
    }
  }
  const Var spec = rfft2_op(x);  // [..., H, Wh, 2]
  // trailing axis of extent 1 lets a [H, Wh] mask broadcast over (re, im)
  const Var ml3 = reshape(m_low, Shape{h, wh, 1});
  const Var mh3 = reshape(m_high, Shape{h, wh, 1});
  const Var x_low = irfft2_op(mul(spec, ml3), w);
  const Var x_high = irfft2_op(mul(spec, mh3), w);
  return {x_low, x_high};
}

Var fuse_gate(const Var& x_low, const Var& x_high, const AffaParams& p) {
  if (x_low->value.shape() != x_high->value.shape()) {
    throw DimensionError("fuse_gate: subband shapes differ, " + shape_str(x_low->value.shape()) +
                         " vs " + shape_str(x_high->value.shape()));
  }
  const Var z = concat({x_low, x_high}, 1);
  const Var gates = softmax(conv2d(z, p.gate_w, p.gate_b, 1, 0), 1);  // [B,2,H,W]
  const Var g_low = slice(gates, 1, 0, 1);
  const Var g_high = slice(gates, 1, 1, 1);
  return add(mul(g_low, x_low), mul(g_high, x_high));
}

AttentionMaps attention_maps(const Var& x_f, const AffaParams& p) {
  const Var mid = leaky_relu(conv2d(x_f, p.attn_w1, p.attn_b1, 1, 1), 0.1);
  const Var a_high = sigmoid(conv2d(mid, p.attn_w2, p.attn_b2, 1, 1));
  // fl(1-a) + a rounds to exactly 1.0 for every a in [0,1], so the two maps
  // tile bit-exactly
  const Var a_low = sub(constant(Tensor::scalar(1.0)), a_high);
  return AttentionMaps{a_high, a_low};
}

AttentionMaps affa_forward(const Var& x, const AffaParams& p) {
  const Shape& s = x->value.shape();
  if (s.size() != 4) throw DimensionError("affa_forward: input must be [B,C,H,W], got " + shape_str(s));
  const Tensor grid = radial_grid(s[2], s[3]);
  const auto [m_low, m_high] = soft_masks(grid, p);
  const auto [x_low, x_high] = decompose(x, m_low, m_high);
  const Var x_f = fuse_gate(x_low, x_high, p);
  return attention_maps(x_f, p);
}

}  // namespace mafnet
