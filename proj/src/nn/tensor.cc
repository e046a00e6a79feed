// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/nn/tensor.h"

#include <unordered_set>
#include <utility>

#include "singlecodec/errors.h"

namespace singlecodec::nn {

namespace {
thread_local bool grad_enabled = true;
}  // namespace

void internal::Node::AccumulateGrad(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Tensor::Tensor(Matrix value, bool requires_grad)
    : node_(std::make_shared<internal::Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Matrix Tensor::grad() const {
  if (!has_grad()) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

float Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item() requires a 1x1 tensor");
  }
  return node_->value(0, 0);
}

void Tensor::Backward() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("Backward() requires a scalar (1x1) tensor");
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order without recursion.
  std::vector<internal::Node*> order;
  std::unordered_set<internal::Node*> visited;
  std::vector<std::pair<internal::Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      internal::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->AccumulateGrad(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    internal::Node* node = *it;
    if (node->backward && node->grad.size() > 0) {
      node->backward(node->grad);
    }
  }
  // Interior gradients are not needed once propagated.
  for (internal::Node* node : order) {
    if (node->backward) node->grad.resize(0, 0);
  }
}

bool GradEnabled() { return grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

Tensor MakeResult(Matrix value, const std::vector<Tensor>& inputs,
                  std::function<void(const Matrix& grad_out)> backward) {
  Tensor out(std::move(value), false);
  if (!grad_enabled) return out;
  bool any = false;
  for (const Tensor& t : inputs) any = any || t.requires_grad();
  if (!any) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  node.parents.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) node.parents.push_back(t.node());
  }
  node.backward = std::move(backward);
  return out;
}

void AccumulateGrad(const Tensor& t, const Matrix& g) {
  if (t.requires_grad()) t.node()->AccumulateGrad(g);
}

}  // namespace singlecodec::nn
