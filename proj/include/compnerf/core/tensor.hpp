#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "compnerf/core/types.hpp"

namespace compnerf {

// Define-by-run reverse-mode autodiff. A Tensor is a value-semantic handle
// to a Node; ops create fresh nodes and, while a Tape is active, record them
// in execution order (which is topological by construction). Parameters are
// nodes created outside any tape; their grad buffers persist and accumulate
// across backward() calls, while tape-local intermediates are zeroed at the
// start of each backward pass.

struct Node {
  Shape shape;
  std::vector<real> value;
  std::vector<real> grad;  // empty until first touched
  bool requires_grad = false;
  bool on_tape = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // adds into parents' grads
  const char* op = "leaf";

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  std::span<real> grad_buf() {
    if (grad.size() != value.size()) grad.assign(value.size(), real(0));
    return grad;
  }
};

class Tape {
 public:
  void record(std::shared_ptr<Node> n) {
    n->on_tape = true;
    nodes_.push_back(std::move(n));
  }
  void clear() {
    for (auto& n : nodes_) n->on_tape = false;
    nodes_.clear();
  }
  size_t size() const { return nodes_.size(); }
  const std::vector<std::shared_ptr<Node>>& nodes() const { return nodes_; }

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
};

Tape* active_tape();

// RAII scope that makes `t` the active tape (nullptr disables recording).
class TapeScope {
 public:
  explicit TapeScope(Tape* t);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, real v);
  static Tensor from(Shape shape, std::vector<real> data, bool requires_grad = false);
  static Tensor scalar(real v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t size() const { return node_->size(); }
  int64_t dim(size_t i) const { return node_->shape[i]; }
  size_t ndim() const { return node_->shape.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  std::span<const real> data() const { return node_->value; }
  std::span<real> mutable_data() { return node_->value; }
  std::span<real> grad() { return node_->grad_buf(); }
  bool has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }
  void zero_grad() {
    if (node_) node_->grad.assign(node_->value.size(), real(0));
  }

  real item() const {
    check(size() == 1, "item() on non-scalar tensor " + shape_str(shape()));
    return node_->value[0];
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Seeds d(root)=1 and sweeps the tape in reverse recorded order. root must be
// a scalar recorded on `tape`. Repeated calls accumulate into leaf grads.
void backward(Tape& tape, const Tensor& root);

namespace detail {
// Creates the result node of an op, records it if a tape is active and any
// parent requires grad. `bw` may be empty for non-differentiable ops.
Tensor make_op(const char* op, Shape shape, std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> bw);
}  // namespace detail

}  // namespace compnerf
