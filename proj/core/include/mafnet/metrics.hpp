#pragma once

#include "mafnet/disparity_map.hpp"

namespace mafnet {

struct MetricsReport {
  double epe = 0.0;   // mean |pred - gt| over jointly valid pixels
  double bad3 = 0.0;  // fraction with |pred - gt| > 3
  double d1 = 0.0;    // fraction with |pred - gt| > 3 and > 5% of gt
  std::int64_t n_valid = 0;
};

// Compares prediction against ground truth over pixels valid in both maps.
// Throws DimensionError on extent mismatch, ContractError when no pixel is
// jointly valid.
MetricsReport compute_metrics(const DisparityMap& pred, const DisparityMap& gt);

}  // namespace mafnet
