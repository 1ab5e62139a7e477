#include "mafnet/autograd.hpp"

#include <unordered_set>
#include <utility>

namespace mafnet {

namespace {

std::string& corrupted_op() {
  thread_local std::string name;
  return name;
}

}  // namespace

namespace detail {

void set_backward_corruption(std::string op_name) { corrupted_op() = std::move(op_name); }
void clear_backward_corruption() { corrupted_op().clear(); }

}  // namespace detail

Var make_leaf(Tensor value, bool requires_grad, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->name = std::move(name);
  return n;
}

Var make_op(const char* op, Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backward_fn) {
  check_finite(value, op);
  bool tracked = false;
  for (const auto& p : parents) {
    if (!p) throw ContractError(std::string(op) + ": null input");
    if (p->requires_grad) tracked = true;
  }
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  if (tracked) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

void accumulate_grad(Node& target, const Tensor& delta, const char* op) {
  if (!target.requires_grad) return;
  if (delta.shape() != target.value.shape()) {
    throw DimensionError(std::string(op) + ": gradient shape " + shape_str(delta.shape()) +
                         " does not match value shape " + shape_str(target.value.shape()));
  }
  check_finite(delta, op);
  const double scale = (!corrupted_op().empty() && corrupted_op() == op) ? 1.01 : 1.0;
  if (target.grad.empty() && target.value.size() > 0) {
    target.grad = Tensor{target.value.shape()};
  }
  for (std::int64_t i = 0; i < delta.size(); ++i) target.grad[i] += delta[i] * scale;
}

void backward(const Var& root) {
  if (!root) throw ContractError("backward: null root");
  if (root->value.size() != 1) {
    throw ContractError("backward: root must be scalar, got shape " + shape_str(root->shape()));
  }
  if (!root->requires_grad) {
    throw ContractError("backward: root does not depend on any gradient-tracked leaf");
  }

  // Iterative post-order over gradient-tracked nodes: parents land before
  // their consumers, so the reversed order is a valid propagation schedule.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) n->grad = Tensor{n->value.shape()};
  root->grad.fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace mafnet
