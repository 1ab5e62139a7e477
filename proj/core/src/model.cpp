#include "mafnet/model.hpp"

#include <chrono>

namespace mafnet {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Model init_model(const RunConfig& cfg, std::int64_t n_tokens) {
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.seed);
  Model m;
  Rng r_enc(seed, 10);
  m.encoder = init_encoder(r_enc);
  Rng r_affa(seed, 11);
  m.affa = init_affa(kFeatChannels, r_affa);
  Rng r_aahf(seed, 12);
  const std::int64_t k = std::min<std::int64_t>(cfg.linformer_k, n_tokens);
  m.aahf = init_aahf(cfg.dmax / 4, n_tokens, k, cfg.d_attn, r_aahf);
  Rng r_ups(seed, 13);
  m.upsample = init_upsample(r_ups);
  return m;
}

std::vector<std::pair<std::string, Var>> model_param_list(const Model& m, bool include_affa) {
  std::vector<std::pair<std::string, Var>> out = encoder_param_list(m.encoder);
  if (include_affa) {
    for (auto& p : affa_param_list(m.affa)) out.push_back(std::move(p));
  }
  for (auto& p : aahf_param_list(m.aahf)) out.push_back(std::move(p));
  for (auto& p : upsample_param_list(m.upsample)) out.push_back(std::move(p));
  return out;
}

ModelOutput model_forward(const Model& m, const Var& left, const Var& right,
                          const RunConfig& cfg, StageTimes* times) {
  auto t0 = std::chrono::steady_clock::now();
  const auto [pl, pr] = extract(left, right, m.encoder);
  if (times) times->encoder = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const CostVolume cv = build_gwc(pl.f4, pr.f4, cfg.dmax / 4, cfg.num_groups);
  const Var volume = mean_over_groups(cv);
  if (times) times->volume = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  AttentionMaps maps;
  if (cfg.use_affa) {
    maps = affa_forward(pl.f4, m.affa);
  } else {
    const Shape& vs = volume->shape();
    maps.a_high = constant(Tensor::full(Shape{vs[0], 1, vs[2], vs[3]}, 0.5));
    maps.a_low = maps.a_high;
  }
  if (times) times->affa = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const SplitVolumes split = split_volume(volume, maps);
  const Var fused = aahf_forward(split, m.aahf);
  if (times) times->aahf = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  ModelOutput out;
  out.d0 = soft_argmax(fused);
  out.d1 = upsample_full(out.d0, left, m.upsample);
  if (times) times->head = seconds_since(t0);
  return out;
}

}  // namespace mafnet
