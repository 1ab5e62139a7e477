#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mafnet/autograd.hpp"

namespace mafnet {

// One-cycle learning rate: linear warm-up from max_lr*warmup_floor to max_lr
// over warmup_frac of the run, then cosine decay to max_lr*final_frac at the
// last step. step is 0-based and must be < total_steps.
double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double max_lr,
                    double warmup_frac, double warmup_floor, double final_frac);

// Global gradient-norm clipping: when the L2 norm over every tracked
// gradient exceeds max_norm, all gradients are scaled down to meet it.
// Returns the pre-clip norm. max_norm <= 0 disables and only measures.
double clip_grad_norm(const std::vector<std::pair<std::string, Var>>& params, double max_norm);

// Adaptive moments with decoupled weight decay. Decay multiplies the weight
// by (1 - lr*wd) before the moment update is applied.
class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, Var>> params, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8, double weight_decay = 1e-4);

  // Applies one update from the gradients currently stored on the params.
  // Throws ContractError when a tracked gradient is missing.
  void step(double lr);

  const std::vector<std::pair<std::string, Var>>& params() const { return params_; }
  std::int64_t step_count() const { return t_; }

  // Checkpoint plumbing: moments by parameter index.
  const Tensor& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor& second_moment(std::size_t i) const { return v_[i]; }
  void restore(std::size_t i, const Tensor& m, const Tensor& v);
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::int64_t t_ = 0;
};

}  // namespace mafnet
