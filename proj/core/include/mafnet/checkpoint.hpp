#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mafnet/tensor.hpp"

namespace mafnet {

// One parameter with its optimizer moment estimates. Moments are zero
// tensors of the same shape until the first update.
struct ParamState {
  std::string name;
  Tensor value;
  Tensor m;
  Tensor v;
};

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  std::array<std::uint64_t, 4> rng_state{};
  std::vector<ParamState> params;
};

// Single self-describing binary blob, magic "MAFCKPT1". save -> load -> save
// is byte-identical.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mafnet
