#pragma once

#include <functional>

#include "mafnet/autograd.hpp"

namespace mafnet {

// Compares reverse-mode gradients of the scalar-valued f against central
// differences, probing every element of x. Returns the worst relative error
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
// eps must lie in [1e-7, 1e-3]; the probe evaluations run forward-only.
double grad_check(const std::function<Var(const Var&)>& f, const Tensor& x, double eps);

// Same comparison probing at most max_probes elements, chosen on a fixed
// stride so runs are reproducible. Full analytic sweep, sampled numeric side;
// meant for large parameter blocks where probing every element is too slow.
double grad_check_sampled(const std::function<Var(const Var&)>& f, const Tensor& x, double eps,
                          std::int64_t max_probes);

}  // namespace mafnet
