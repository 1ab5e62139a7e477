#pragma once

#include <string>
#include <vector>

#include "mafnet/checkpoint.hpp"
#include "mafnet/data.hpp"
#include "mafnet/metrics.hpp"
#include "mafnet/model.hpp"
#include "mafnet/optim.hpp"

namespace mafnet {

struct TrainResult {
  MetricsReport train_metrics;  // over the training pairs
  MetricsReport eval_metrics;   // over the held-out pairs
  double final_loss = 0.0;
  std::string checkpoint_file;
};

// Deterministic dataset streams: the training set and the held-out set come
// from disjoint substreams of cfg.seed.
std::vector<StereoSample> make_train_set(const RunConfig& cfg);
std::vector<StereoSample> make_eval_set(const RunConfig& cfg);

// Single-sample forward; the returned map marks every pixel valid.
DisparityMap predict_disparity(const Model& m, const Tensor& left, const Tensor& right,
                               const RunConfig& cfg, StageTimes* times = nullptr);

// Pixel-weighted aggregate of per-pair metrics.
MetricsReport evaluate_pairs(const Model& m, const RunConfig& cfg,
                             const std::vector<StereoSample>& samples);

// Full training loop: forward/backward/update with the one-cycle schedule,
// per-step JSONL logging to <out_dir>/train_log.jsonl, resume from
// cfg.checkpoint_path when set, final checkpoint to <out_dir>/model.ckpt.
// quiet suppresses stdout progress.
TrainResult run_train(const RunConfig& cfg, bool quiet = false);

// Checkpoint plumbing shared by the trainer and the CLI.
Checkpoint snapshot_params(const AdamW& opt, std::uint64_t cfg_hash, std::uint64_t step,
                           const std::array<std::uint64_t, 4>& rng_state);
void restore_params(const Checkpoint& ckpt, AdamW& opt);

// Loads a checkpoint into a freshly initialized model (no optimizer state).
// Refuses on config-hash mismatch.
Model load_model(const RunConfig& cfg, const std::string& ckpt_path);

}  // namespace mafnet
