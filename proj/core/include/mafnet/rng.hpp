#pragma once

#include <array>
#include <cstdint>

namespace mafnet {

// xoshiro256++ seeded through splitmix64. Deterministic across platforms and
// builds; the four-word state is serialized verbatim into checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent substream: same seed with a different stream id yields an
  // unrelated sequence.
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n)  (n > 0).
  std::int64_t uniform_int(std::int64_t n);
  // Standard normal via Box-Muller; stateless apart from the generator.
  double normal();

  std::array<std::uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace mafnet
