#pragma once

#include <string>
#include <vector>

namespace mafnet {

struct GradCheckRow {
  std::string module;
  double max_rel_err = 0.0;
  bool pass = false;
};

inline constexpr double kGradCheckTol = 1e-4;

// Central-difference checks per module at fixed toy extents (32x32 images,
// dmax 16), plus one end-to-end row through the whole pipeline. Large
// parameter blocks are probed on a fixed sampling stride. quiet suppresses
// the table on stdout.
std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed, bool quiet);

bool all_pass(const std::vector<GradCheckRow>& rows);

}  // namespace mafnet
