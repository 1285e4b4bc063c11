#include "compnerf/core/tensor.hpp"

#include <algorithm>

namespace compnerf {

namespace {
thread_local Tape* g_tape = nullptr;
}

Tape* active_tape() { return g_tape; }

TapeScope::TapeScope(Tape* t) : prev_(g_tape) { g_tape = t; }
TapeScope::~TapeScope() { g_tape = prev_; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.assign(numel(n->shape), real(0));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::full(Shape shape, real v) {
  auto t = zeros(std::move(shape));
  std::fill(t.mutable_data().begin(), t.mutable_data().end(), v);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<real> data, bool requires_grad) {
  check(numel(shape) == static_cast<int64_t>(data.size()),
        "tensor data length " + std::to_string(data.size()) + " does not match shape " +
            shape_str(shape));
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(data);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(real v) { return from({1}, {v}); }

void backward(Tape& tape, const Tensor& root) {
  check(root.defined() && root.size() == 1, "backward expects a scalar root");
  check(root.node()->on_tape, "backward root is not on the active tape");
  // Intermediates get fresh grad buffers each pass; leaves keep accumulating.
  for (const auto& n : tape.nodes()) n->grad.assign(n->value.size(), real(0));
  root.node()->grad[0] = real(1);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node& n = **it;
    if (n.backward && n.grad.size() == n.value.size()) n.backward(n);
  }
}

namespace detail {

Tensor make_op(const char* op, Shape shape, std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->value.assign(numel(n->shape), real(0));
  bool any_rg = false;
  for (const auto& p : parents) any_rg = any_rg || (p && p->requires_grad);
  Tape* tape = active_tape();
  if (tape && any_rg) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(bw);
    Tensor t(n);
    tape->record(n);
    return t;
  }
  return Tensor(std::move(n));
}

}  // namespace detail

}  // namespace compnerf
