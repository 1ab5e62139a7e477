#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mafnet/tensor.hpp"

namespace mafnet {

struct Node;
using Var = std::shared_ptr<Node>;

// One value in the dynamic computation graph. backward_fn reads this node's
// grad and accumulates into the parents' grads via accumulate_grad.
struct Node {
  Tensor value;
  Tensor grad;  // empty until backward touches this node
  bool requires_grad = false;
  std::string op;    // producing operation, empty for leaves
  std::string name;  // optional label, used for parameters
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  const Shape& shape() const { return value.shape(); }
};

Var make_leaf(Tensor value, bool requires_grad = false, std::string name = "");

// Wraps an op result. Verifies the value is finite, derives requires_grad
// from the parents, and drops the graph edges entirely when no parent is
// gradient-tracked so constant subgraphs cost nothing to keep.
Var make_op(const char* op, Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backward_fn);

// Adds delta into target.grad (allocating zeros on first touch). No-op when
// the target is not gradient-tracked. `op` names the caller for diagnostics
// and for the fault-injection hook below.
void accumulate_grad(Node& target, const Tensor& delta, const char* op);

// Reverse-mode sweep from a scalar root. Grads of every reachable
// gradient-tracked node are recomputed from scratch, so callers never need a
// separate zeroing step between iterations.
void backward(const Var& root);

namespace detail {

// Fault injection for negative-control tests: while set, gradient
// contributions from the named op are scaled by 1.01, which a derivative
// check must flag. Cleared state injects nothing.
void set_backward_corruption(std::string op_name);
void clear_backward_corruption();

}  // namespace detail

}  // namespace mafnet
