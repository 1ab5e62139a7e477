#include "mafnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mafnet {

namespace {

double eval_scalar(const std::function<Var(const Var&)>& f, const Tensor& x) {
  Var leaf = make_leaf(x);
  Var out = f(leaf);
  if (!out || out->value.size() != 1) {
    throw ContractError("grad_check: probe function must return a scalar");
  }
  return out->value[0];
}

double check_at(const std::function<Var(const Var&)>& f, const Tensor& x, double eps,
                const std::vector<std::int64_t>& probes) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ContractError("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  Var leaf = make_leaf(x, /*requires_grad=*/true);
  Var out = f(leaf);
  if (!out || out->value.size() != 1) {
    throw ContractError("grad_check: probe function must return a scalar");
  }
  backward(out);
  const Tensor analytic = leaf->grad;

  double worst = 0.0;
  Tensor probe = x;
  for (std::int64_t i : probes) {
    const double keep = probe[i];
    probe[i] = keep + eps;
    const double vp = eval_scalar(f, probe);
    probe[i] = keep - eps;
    const double vm = eval_scalar(f, probe);
    probe[i] = keep;
    const double numeric = (vp - vm) / (2.0 * eps);
    const double a = analytic[i];
    const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace

double grad_check(const std::function<Var(const Var&)>& f, const Tensor& x, double eps) {
  std::vector<std::int64_t> probes(static_cast<std::size_t>(x.size()));
  for (std::int64_t i = 0; i < x.size(); ++i) probes[static_cast<std::size_t>(i)] = i;
  return check_at(f, x, eps, probes);
}

double grad_check_sampled(const std::function<Var(const Var&)>& f, const Tensor& x, double eps,
                          std::int64_t max_probes) {
  if (max_probes < 1) throw ContractError("grad_check_sampled: max_probes must be >= 1");
  std::vector<std::int64_t> probes;
  if (x.size() <= max_probes) {
    for (std::int64_t i = 0; i < x.size(); ++i) probes.push_back(i);
  } else {
    const std::int64_t step = x.size() / max_probes;
    for (std::int64_t i = 0; i < x.size() && static_cast<std::int64_t>(probes.size()) < max_probes;
         i += step) {
      probes.push_back(i);
    }
    probes.back() = x.size() - 1;  // always touch the tail
  }
  return check_at(f, x, eps, probes);
}

}  // namespace mafnet
