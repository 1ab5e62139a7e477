#include "mafnet/metrics.hpp"

#include <cmath>

#include "mafnet/errors.hpp"

namespace mafnet {

MetricsReport compute_metrics(const DisparityMap& pred, const DisparityMap& gt) {
  if (!same_shape(pred.values, gt.values)) {
    throw DimensionError("compute_metrics: extent mismatch, pred " +
                         shape_str(pred.values.shape()) + " vs gt " +
                         shape_str(gt.values.shape()));
  }
  MetricsReport r;
  double err_sum = 0.0;
  std::int64_t n_bad3 = 0, n_d1 = 0;
  const std::int64_t n = gt.values.size();
  for (std::int64_t i = 0; i < n; ++i) {
    if (!pred.valid[static_cast<std::size_t>(i)] || !gt.valid[static_cast<std::size_t>(i)]) {
      continue;
    }
    const double e = std::abs(pred.values[i] - gt.values[i]);
    err_sum += e;
    if (e > 3.0) {
      ++n_bad3;
      if (e > 0.05 * std::abs(gt.values[i])) ++n_d1;
    }
    ++r.n_valid;
  }
  if (r.n_valid == 0) {
    throw ContractError("compute_metrics: no jointly valid pixels");
  }
  const double nv = static_cast<double>(r.n_valid);
  r.epe = err_sum / nv;
  r.bad3 = static_cast<double>(n_bad3) / nv;
  r.d1 = static_cast<double>(n_d1) / nv;
  return r;
}

}  // namespace mafnet
