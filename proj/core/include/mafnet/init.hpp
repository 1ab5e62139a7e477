#pragma once

#include <string>

#include "mafnet/autograd.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

// Trainable leaf drawn from U(-b, b) with b = gain * sqrt(3 / fan_in), so the
// element sd is gain / sqrt(fan_in). gain = 1 preserves variance through a
// plain linear layer; layers feeding a leaky rectifier pass the matching
// rectifier gain to stay variance-preserving through the whole stack.
Var fan_in_param(Shape shape, std::int64_t fan_in, Rng& rng, std::string name, double gain = 1.0);

// Trainable leaf of zeros (biases, raw scalars that start at a fixed point).
Var zeros_param(Shape shape, std::string name);

// Trainable scalar leaf with an explicit starting value.
Var scalar_param(double v, std::string name);

}  // namespace mafnet
