#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mafnet/ops.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

// Frequency-splitting attention over one feature map. Thresholds live in
// (0,1) via sigmoid of an unconstrained raw scalar; the temperature stays
// positive via exp. Convolution stacks: a 1x1 gate (2C -> 2) and the
// attention head (3x3 C -> C/2 leaky, 3x3 C/2 -> 1, sigmoid).
struct AffaParams {
  Var tau_low_raw;   // threshold of the low-pass mask, pre-sigmoid
  Var tau_high_raw;  // threshold of the high-pass mask, pre-sigmoid
  Var gamma_raw;     // mask temperature, pre-exp
  Var gate_w, gate_b;
  Var attn_w1, attn_b1;
  Var attn_w2, attn_b2;
};

// Complementary per-pixel weights: a_low + a_high == 1 exactly.
struct AttentionMaps {
  Var a_high;  // [B,1,H,W], in (0,1)
  Var a_low;
};

AffaParams init_affa(std::int64_t channels, Rng& rng);
std::vector<std::pair<std::string, Var>> affa_param_list(const AffaParams& p);

// Constrained views of the raw scalars.
Var tau_low_of(const AffaParams& p);
Var tau_high_of(const AffaParams& p);
Var gamma_of(const AffaParams& p);

// Normalized radius over the half-spectrum [H, floor(W/2)+1]:
// r(u,v) = sqrt((fu^2 + fv^2)/2), fu = min(u, H-u)/(H/2), fv = v/(W/2).
// r(0,0) = 0; the Nyquist corner of an even-sized grid has r = 1.
Tensor radial_grid(std::int64_t h, std::int64_t w);

// m_low = sigmoid((tau_l - r)/gamma), m_high = sigmoid((r - tau_h)/gamma),
// differentiable in the threshold/temperature parameters.
std::pair<Var, Var> soft_masks(const Tensor& grid, const AffaParams& p);

// Subband split: transform, mask the half-spectrum, transform back.
// Returns (x_low, x_high), each shaped like x.
std::pair<Var, Var> decompose(const Var& x, const Var& m_low, const Var& m_high);

// Per-pixel 2-way softmax gate over the concatenated subbands:
// x_f = G_low * x_low + G_high * x_high.
Var fuse_gate(const Var& x_low, const Var& x_high, const AffaParams& p);

AttentionMaps attention_maps(const Var& x_f, const AffaParams& p);

// decompose -> fuse_gate -> attention_maps over one feature map.
AttentionMaps affa_forward(const Var& x, const AffaParams& p);

}  // namespace mafnet
