#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mafnet/affa.hpp"
#include "mafnet/ops.hpp"

namespace mafnet {

// Fusion over the frequency-split cost volumes: flatten to N = H4*W4 tokens
// of width 2*D4, attend with keys/values projected to a k-token subspace,
// project back to D4 channels. E and F are learned [k, N] token mixers.
struct AahfParams {
  Var wq, wk, wv;      // [2*D4, d_attn]
  Var e_proj, f_proj;  // [k, N]
  Var w_out;           // [d_attn, D4]
  Var out_b;           // [D4], zero-initialized
};

struct SplitVolumes {
  Var cv_high;  // [B, D4, H4, W4]
  Var cv_low;
};

// E/F starting point: row i averages its contiguous token block. Collapses
// to the identity matrix when k == n.
Tensor averaging_projection(std::int64_t k, std::int64_t n);

AahfParams init_aahf(std::int64_t d4, std::int64_t n_tokens, std::int64_t k, std::int64_t d_attn,
                     Rng& rng);
std::vector<std::pair<std::string, Var>> aahf_param_list(const AahfParams& p);

// cv_high = a_high * c, cv_low = a_low * c, maps broadcast over disparity.
SplitVolumes split_volume(const Var& c, const AttentionMaps& a);

// Reference O(N^2 * d) attention on plain tensors [N, d]. Scores are
// evaluated in row chunks so the N x N matrix never materializes whole.
Tensor full_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// O(N * k * d) low-rank path: K' = E*K, V' = F*V, attention over k keys.
Tensor lin_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& e,
                     const Tensor& f);

// Differentiable fusion: concat-flatten, project Q/K/V, low-rank attention,
// output projection, reshape to [B, D4, H4, W4]. use_full_attention swaps in
// the quadratic path (oracle comparisons at toy sizes).
Var aahf_forward(const SplitVolumes& s, const AahfParams& p, bool use_full_attention = false);

}  // namespace mafnet
