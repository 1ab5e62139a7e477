#pragma once

#include <cstdint>
#include <string>

namespace mafnet {

// Flat run configuration. Defaults target a desk-scale overfit run; the
// full-scale values from the reference training regime remain reachable by
// editing the config file.
struct RunConfig {
  std::int64_t height = 64;
  std::int64_t width = 128;
  std::int64_t dmax = 32;
  std::int64_t num_groups = 8;
  std::int64_t linformer_k = 256;  // clamped to the token count at model init
  std::int64_t d_attn = 32;
  std::int64_t batch_size = 2;
  std::int64_t steps = 2000;
  std::int64_t halt_step = 0;  // > 0: stop after completing this step count; 0: run to `steps`
  std::int64_t n_train_pairs = 20;
  std::int64_t n_eval_pairs = 10;
  std::int64_t seed = 7;
  double max_lr = 8e-4;
  double warmup_frac = 0.05;
  double warmup_floor = 0.1;
  double final_lr_frac = 0.01;
  double lambda0 = 0.3;
  double lambda1 = 1.0;
  double weight_decay = 1e-4;
  double clip_grad_norm = 1.0;  // global gradient-norm cap per step; 0 disables
  bool use_affa = true;
  std::string data_dir;
  std::string out_dir = "out";
  std::string checkpoint_path;
};

// Parses "key = value" lines ('#' comments, blank lines ok). Unknown keys
// are errors. Missing keys keep their defaults.
RunConfig load_config(const std::string& path);

// Throws ConfigError when any field violates its contract.
void validate_config(const RunConfig& cfg);

// Canonical text form, one sorted "key=value" line per field. Transient
// fields (paths, halt_step) are excluded when include_transient is false;
// the hash covers that reduced form so moving files or slicing a run never
// invalidates a checkpoint.
std::string canonical_config(const RunConfig& cfg, bool include_transient);
std::uint64_t config_hash(const RunConfig& cfg);

void save_config(const RunConfig& cfg, const std::string& path);

}  // namespace mafnet
