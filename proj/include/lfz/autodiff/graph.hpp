#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lfz/autodiff/tensor.hpp"

namespace lfz::ad {

template <class T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents that require it.
  std::function<void(Node&)> backward;
  const char* op = "leaf";

  bool is_leaf() const { return parents.empty(); }

  Tensor<T>& ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape(), T(0));
    return grad;
  }
};

/// Handle to a graph node. Copies alias the same node.
template <class T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false) : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  // Direct write access for optimizers and running statistics; bypasses the graph.
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
  std::size_t size() const { return node_->value.size(); }
  T item() const { return node_->value.item(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  /// Accumulated gradient; zeros when backward has not reached this node.
  const Tensor<T>& grad() const { return node_->ensure_grad(); }
  void zero_grad() { node_->grad = Tensor<T>(); }

  void backward() const;

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Thread-local switch for graph recording; see NoGradGuard.
inline bool& grad_enabled() {
  thread_local bool on = true;
  return on;
}

/// Disables graph recording on this thread for its lifetime (inference).
class NoGradGuard {
 public:
  NoGradGuard() : prev_(grad_enabled()) { grad_enabled() = false; }
  ~NoGradGuard() { grad_enabled() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Builds a result node. When no parent requires a gradient, or recording is
/// off, the node is a detached constant and the backward closure is dropped.
template <class T, class It, class F>
Var<T> make_result(const char* op, Tensor<T> value, It first, It last, F&& backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->op = op;
  bool any = false;
  for (It p = first; p != last; ++p) any = any || p->requires_grad();
  if (any && grad_enabled()) {
    node->requires_grad = true;
    for (It p = first; p != last; ++p) node->parents.push_back(p->node());
    node->backward = std::forward<F>(backward);
  }
  return Var<T>(std::move(node));
}

template <class T, class F>
Var<T> make_result(const char* op, Tensor<T> value, std::initializer_list<Var<T>> parents, F&& backward) {
  return make_result<T>(op, std::move(value), parents.begin(), parents.end(), std::forward<F>(backward));
}

template <class T, class F>
Var<T> make_result(const char* op, Tensor<T> value, const std::vector<Var<T>>& parents, F&& backward) {
  return make_result<T>(op, std::move(value), parents.begin(), parents.end(), std::forward<F>(backward));
}

namespace detail {

/// Parents in post-order, so reverse iteration visits consumers before producers.
template <class T>
std::vector<Node<T>*> topological_order(Node<T>* root) {
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace detail

template <class T>
void Var<T>::backward() const {
  if (node_->value.size() != 1)
    throw UsageError("backward() needs a scalar loss, got shape " + shape_str(node_->value.shape()));
  if (!node_->requires_grad) return;
  auto order = detail::topological_order(node_.get());
  // Interior gradients are allocated on first use and released right after
  // their node has propagated, so only the live frontier is held in memory.
  for (Node<T>* n : order)
    if (!n->is_leaf()) n->grad = Tensor<T>();
  node_->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->is_leaf()) continue;
    n->ensure_grad();
    n->backward(*n);
    n->grad = Tensor<T>();
  }
}

/// Sums `src` into the parent's gradient when that parent is tracked.
template <class T>
void accumulate(Node<T>& parent, const Tensor<T>& src) {
  if (!parent.requires_grad) return;
  Tensor<T>& g = parent.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
}

template <class T>
Var<T> constant(Tensor<T> t) {
  return Var<T>(std::move(t), false);
}

template <class T>
Var<T> parameter(Tensor<T> t) {
  return Var<T>(std::move(t), true);
}

}  // namespace lfz::ad
