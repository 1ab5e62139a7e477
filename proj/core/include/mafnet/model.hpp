#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mafnet/aahf.hpp"
#include "mafnet/affa.hpp"
#include "mafnet/config.hpp"
#include "mafnet/cost_volume.hpp"
#include "mafnet/disparity.hpp"
#include "mafnet/encoder.hpp"

namespace mafnet {

// Every trainable tensor of the pipeline. The attention-map branch can be
// disabled at forward time (maps pinned to 0.5) for baseline comparisons;
// its parameters then receive no gradient.
struct Model {
  EncoderParams encoder;
  AffaParams affa;
  AahfParams aahf;
  UpsampleParams upsample;
};

struct ModelOutput {
  Var d0;  // [B, H4, W4], quarter-resolution disparity units
  Var d1;  // [B, H, W], full-resolution pixels
};

// Wall-clock seconds per pipeline stage, filled by model_forward on request.
struct StageTimes {
  double encoder = 0.0;
  double volume = 0.0;
  double affa = 0.0;
  double aahf = 0.0;
  double head = 0.0;
};

// Initialization draws from per-module substreams of cfg.seed, so adding a
// module never shifts the others' weights.
Model init_model(const RunConfig& cfg, std::int64_t n_tokens);

// include_affa=false omits the map-branch parameters (they are unreachable
// from the loss when the maps are pinned).
std::vector<std::pair<std::string, Var>> model_param_list(const Model& m, bool include_affa);

ModelOutput model_forward(const Model& m, const Var& left, const Var& right,
                          const RunConfig& cfg, StageTimes* times = nullptr);

}  // namespace mafnet
