#include "mafnet/init.hpp"

#include <cmath>

namespace mafnet {

Var fan_in_param(Shape shape, std::int64_t fan_in, Rng& rng, std::string name, double gain) {
  if (fan_in < 1) throw ContractError("fan_in_param: fan_in must be >= 1");
  if (!(gain > 0.0)) throw ContractError("fan_in_param: gain must be positive");
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  Tensor t = Tensor::uniform(std::move(shape), rng, -bound, bound);
  return make_leaf(std::move(t), /*requires_grad=*/true, std::move(name));
}

Var zeros_param(Shape shape, std::string name) {
  return make_leaf(Tensor{std::move(shape)}, /*requires_grad=*/true, std::move(name));
}

Var scalar_param(double v, std::string name) {
  return make_leaf(Tensor::scalar(v), /*requires_grad=*/true, std::move(name));
}

}  // namespace mafnet
