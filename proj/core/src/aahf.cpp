#include "mafnet/aahf.hpp"

#include <algorithm>
#include <cmath>

#include "mafnet/init.hpp"
#include "mafnet/linalg.hpp"

namespace mafnet {

Tensor averaging_projection(std::int64_t k, std::int64_t n) {
  if (k < 1 || k > n) {
    throw ContractError("averaging_projection: need 1 <= k <= n, got k=" + std::to_string(k) +
                        ", n=" + std::to_string(n));
  }
  Tensor e{Shape{k, n}};
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t start = i * n / k;
    const std::int64_t end = (i + 1) * n / k;
    const double w = 1.0 / static_cast<double>(end - start);
    for (std::int64_t j = start; j < end; ++j) e.at({i, j}) = w;
  }
  return e;
}

namespace {

// Query/key scale applied to the identity block at init. The mixer replaces
// the volume outright (no residual path), so a near-uniform softmax at init
// would average all tokens into one vector and starve every upstream
// gradient; seeding wq = wk ~ scale * I opens attention as a sharpened
// correlation between token cost profiles instead.
constexpr double kQkSeedScale = 8.0;

// Identity block plus fan-in noise. The noise keeps the columns past the
// identity block trainable: a column pair exactly zero in both wq and wk
// would receive exactly zero gradient forever.
Var seeded_projection(std::int64_t rows, std::int64_t cols, double diag, Rng& rng,
                      const std::string& name) {
  const double bound = std::sqrt(3.0 / static_cast<double>(rows));
  Tensor t = Tensor::uniform({rows, cols}, rng, -bound, bound);
  for (std::int64_t i = 0; i < std::min(rows, cols); ++i) t.data()[i * cols + i] += diag;
  return make_leaf(std::move(t), /*requires_grad=*/true, name);
}

}  // namespace

AahfParams init_aahf(std::int64_t d4, std::int64_t n_tokens, std::int64_t k, std::int64_t d_attn,
                     Rng& rng) {
  if (d4 < 1 || d_attn < 1) throw ConfigError("init_aahf: extents must be positive");
  if (k > n_tokens) {
    throw ConfigError("init_aahf: low-rank size k=" + std::to_string(k) + " exceeds token count " +
                      std::to_string(n_tokens));
  }
  AahfParams p;
  p.wq = seeded_projection(2 * d4, d_attn, kQkSeedScale, rng, "aahf.wq");
  p.wk = seeded_projection(2 * d4, d_attn, kQkSeedScale, rng, "aahf.wk");
  p.wv = seeded_projection(2 * d4, d_attn, 1.0, rng, "aahf.wv");
  p.e_proj = make_leaf(averaging_projection(k, n_tokens), /*requires_grad=*/true, "aahf.e_proj");
  p.f_proj = make_leaf(averaging_projection(k, n_tokens), /*requires_grad=*/true, "aahf.f_proj");
  // Under self-focused attention and the identity-embedded wv, this output
  // map recomposes high + low back into a volume, so the whole mixer starts
  // near an identity on the split volume and training bends it from there.
  {
    const double bound = std::sqrt(3.0 / static_cast<double>(d_attn));
    Tensor t = Tensor::uniform({d_attn, d4}, rng, -bound, bound);
    for (std::int64_t d = 0; d < d4; ++d) {
      if (d < d_attn) t.data()[d * d4 + d] += 1.0;
      if (d4 + d < d_attn) t.data()[(d4 + d) * d4 + d] += 1.0;
    }
    p.w_out = make_leaf(std::move(t), /*requires_grad=*/true, "aahf.w_out");
  }
  p.out_b = zeros_param({d4}, "aahf.out_b");
  return p;
}

std::vector<std::pair<std::string, Var>> aahf_param_list(const AahfParams& p) {
  return {
      {"aahf.wq", p.wq},         {"aahf.wk", p.wk},         {"aahf.wv", p.wv},
      {"aahf.e_proj", p.e_proj}, {"aahf.f_proj", p.f_proj}, {"aahf.w_out", p.w_out},
      {"aahf.out_b", p.out_b},
  };
}

SplitVolumes split_volume(const Var& c, const AttentionMaps& a) {
  const Shape& cs = c->value.shape();
  const Shape& as = a.a_high->value.shape();
  if (cs.size() != 4) throw DimensionError("split_volume: volume must be [B,D4,H4,W4], got " + shape_str(cs));
  if (as.size() != 4 || as[0] != cs[0] || as[1] != 1 || as[2] != cs[2] || as[3] != cs[3]) {
    throw DimensionError("split_volume: maps " + shape_str(as) + " do not match volume " +
                         shape_str(cs));
  }
  return SplitVolumes{mul(a.a_high, c), mul(a.a_low, c)};
}

namespace {

void check_attn_operands(const Tensor& q, const Tensor& k, const Tensor& v, const char* op) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.shape() != k.shape() ||
      k.shape() != v.shape()) {
    throw DimensionError(std::string(op) + ": q, k, v must share shape [N, d], got " +
                         shape_str(q.shape()) + ", " + shape_str(k.shape()) + ", " +
                         shape_str(v.shape()));
  }
}

Tensor rows_of(const Tensor& t, std::int64_t r0, std::int64_t rows) {
  const std::int64_t d = t.dim(1);
  Tensor out{Shape{rows, d}};
  std::copy(t.data() + r0 * d, t.data() + (r0 + rows) * d, out.data());
  return out;
}

}  // namespace

Tensor full_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  check_attn_operands(q, k, v, "full_attention");
  const std::int64_t n = q.dim(0), d = q.dim(1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const std::int64_t chunk = 256;  // bounds the transient scores block at chunk*N
  Tensor out{Shape{n, d}};
  for (std::int64_t r0 = 0; r0 < n; r0 += chunk) {
    const std::int64_t rows = std::min(chunk, n - r0);
    Tensor scores = matmul_nt(rows_of(q, r0, rows), k);
    for (std::int64_t i = 0; i < scores.size(); ++i) scores[i] *= scale;
    softmax_last_inplace(scores);
    const Tensor ctx = matmul_nn(scores, v);
    std::copy(ctx.data(), ctx.data() + rows * d, out.data() + r0 * d);
  }
  return out;
}

Tensor lin_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& e,
                     const Tensor& f) {
  check_attn_operands(q, k, v, "lin_attention");
  const std::int64_t n = q.dim(0), d = q.dim(1);
  if (e.rank() != 2 || f.rank() != 2 || e.dim(1) != n || f.dim(1) != n || e.dim(0) != f.dim(0)) {
    throw DimensionError("lin_attention: projections must be [k, N] with matching k, got " +
                         shape_str(e.shape()) + " and " + shape_str(f.shape()));
  }
  if (e.dim(0) > n) throw ContractError("lin_attention: k must not exceed N");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Tensor kp = matmul_nn(e, k);  // [k, d]
  const Tensor vp = matmul_nn(f, v);
  Tensor scores = matmul_nt(q, kp);  // [N, k]
  for (std::int64_t i = 0; i < scores.size(); ++i) scores[i] *= scale;
  softmax_last_inplace(scores);
  return matmul_nn(scores, vp);
}

Var aahf_forward(const SplitVolumes& s, const AahfParams& p, bool use_full_attention) {
  const Shape& cs = s.cv_high->value.shape();
  if (cs.size() != 4 || s.cv_low->value.shape() != cs) {
    throw DimensionError("aahf_forward: split volumes must share shape [B,D4,H4,W4]");
  }
  const std::int64_t b = cs[0], d4 = cs[1], h4 = cs[2], w4 = cs[3];
  const std::int64_t n = h4 * w4;
  const std::int64_t d_attn = p.wq->value.dim(1);
  if (p.wq->value.dim(0) != 2 * d4) {
    throw DimensionError("aahf_forward: projections expect " +
                         std::to_string(p.wq->value.dim(0)) + " token channels, volume gives " +
                         std::to_string(2 * d4));
  }
  if (p.e_proj->value.dim(1) != n) {
    throw DimensionError("aahf_forward: token mixer built for N=" +
                         std::to_string(p.e_proj->value.dim(1)) + ", volume gives N=" +
                         std::to_string(n));
  }

  const Var zc = concat({s.cv_high, s.cv_low}, 1);                 // [B, 2*D4, H4, W4]
  const Var x = permute(reshape(zc, {b, 2 * d4, n}), {0, 2, 1});   // [B, N, 2*D4]
  const Var q = bmm(x, p.wq);
  const Var k = bmm(x, p.wk);
  const Var v = bmm(x, p.wv);

  Var keys, values;
  if (use_full_attention) {
    keys = k;
    values = v;
  } else {
    keys = bmm(p.e_proj, k);  // [B, k, d_attn]
    values = bmm(p.f_proj, v);
  }
  const Var scores =
      mul_scalar(bmm(q, permute(keys, {0, 2, 1})), 1.0 / std::sqrt(static_cast<double>(d_attn)));
  const Var attn = softmax(scores, 2);
  const Var ctx = bmm(attn, values);                               // [B, N, d_attn]
  const Var projected = add(bmm(ctx, p.w_out), p.out_b);           // [B, N, D4]
  return reshape(permute(projected, {0, 2, 1}), {b, d4, h4, w4});
}

}  // namespace mafnet
