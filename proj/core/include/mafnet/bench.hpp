#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mafnet {

// One attention timing row. Times are medians over `reps` runs after one
// warm-up; transient bytes estimate the largest scratch buffer each path
// allocates (score matrices).
struct BenchRecord {
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::int64_t d_attn = 0;
  double t_full = 0.0;  // seconds
  double t_lin = 0.0;
  double speedup = 0.0;  // t_full / t_lin
  std::int64_t full_transient_bytes = 0;
  std::int64_t lin_transient_bytes = 0;
};

// Times full_attention vs lin_attention over the given grid. The full path
// is measured once per n and shared across the k rows. out_path, when
// nonempty, receives one JSON object per line.
std::vector<BenchRecord> run_attention_bench(const std::vector<std::int64_t>& ns,
                                             const std::vector<std::int64_t>& ks,
                                             std::int64_t d_attn, int reps,
                                             const std::string& out_path, bool quiet);

// Default grid: n in {1024, 4096, 8192, 16384}, k in {64, 256}, d_attn 32,
// median of 10.
std::vector<BenchRecord> run_attention_bench(const std::string& out_path, bool quiet);

}  // namespace mafnet
