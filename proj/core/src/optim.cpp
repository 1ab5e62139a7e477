#include "mafnet/optim.hpp"

#include <cmath>

#include "mafnet/errors.hpp"

namespace mafnet {

double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double max_lr,
                    double warmup_frac, double warmup_floor, double final_frac) {
  if (step < 0 || step >= total_steps) {
    throw ContractError("one_cycle_lr: step " + std::to_string(step) + " outside [0, " +
                        std::to_string(total_steps) + ")");
  }
  const std::int64_t warmup =
      std::min(total_steps - 1, static_cast<std::int64_t>(std::llround(
                                    warmup_frac * static_cast<double>(total_steps))));
  if (step < warmup) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup);
    return max_lr * (warmup_floor + (1.0 - warmup_floor) * t);
  }
  // Peak sits at the first post-warm-up step; the final step lands exactly
  // on the floor.
  const std::int64_t span = total_steps - 1 - warmup;
  const double t = span > 0 ? static_cast<double>(step - warmup) / static_cast<double>(span) : 1.0;
  const double floor = max_lr * final_frac;
  return floor + (max_lr - floor) * 0.5 * (1.0 + std::cos(t * 3.14159265358979323846));
}

double clip_grad_norm(const std::vector<std::pair<std::string, Var>>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, var] : params) {
    const Node& p = *var;
    if (p.grad.size() != p.value.size()) {
      throw ContractError("clip_grad_norm: missing gradient for '" + name + "'");
    }
    for (std::int64_t j = 0; j < p.grad.size(); ++j) sq += p.grad[j] * p.grad[j];
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& [name, var] : params) {
      Tensor& g = var->grad;
      for (std::int64_t j = 0; j < g.size(); ++j) g[j] *= scale;
    }
  }
  return norm;
}

AdamW::AdamW(std::vector<std::pair<std::string, Var>> params, double beta1, double beta2,
             double eps, double weight_decay)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps),
      weight_decay_(weight_decay) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& [name, var] : params_) {
    if (!var || !var->requires_grad) {
      throw ContractError("AdamW: parameter '" + name + "' is not a tracked leaf");
    }
    m_.emplace_back(var->value.shape());
    v_.emplace_back(var->value.shape());
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Node& p = *params_[i].second;
    if (p.grad.size() != p.value.size()) {
      throw ContractError("AdamW: missing gradient for '" + params_[i].first + "'");
    }
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::int64_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      p.value[j] *= 1.0 - lr * weight_decay_;
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      p.value[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
    }
    check_finite(p.value, ("AdamW update of " + params_[i].first).c_str());
  }
}

void AdamW::restore(std::size_t i, const Tensor& m, const Tensor& v) {
  if (i >= params_.size() || !same_shape(m, m_[i]) || !same_shape(v, v_[i])) {
    throw ContractError("AdamW::restore: moment shape mismatch");
  }
  m_[i] = m;
  v_[i] = v;
}

}  // namespace mafnet
