// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_NN_TENSOR_H_
#define SINGLECODEC_NN_TENSOR_H_

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace singlecodec::nn {

// All activations are row-major 2-D matrices. Sequence batches are stored as
// [batch * time x channels] with row index b * time + t; image batches as
// [batch * height * width x channels] (NHWC).
using Matrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic, Eigen::RowMajor>;

namespace internal {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Matrix& grad_out)> backward;

  void AccumulateGrad(const Matrix& g);
};

}  // namespace internal

// Handle to a node of the reverse-mode autodiff graph. Copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  // Leaf tensor that accumulates gradients.
  static Tensor Parameter(Matrix value) {
    return Tensor(std::move(value), true);
  }

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  bool has_grad() const { return node_ && node_->grad.size() > 0; }
  // Gradient, or a zero matrix of the value's shape if none has arrived.
  Matrix grad() const;
  Matrix& mutable_grad() { return node_->grad; }
  void ZeroGrad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  float item() const;

  // Seeds d(self)/d(self) = 1 and propagates to every reachable leaf.
  // The tensor must be 1x1.
  void Backward() const;

  // Same value, cut from the graph.
  Tensor Detach() const { return Tensor(node_->value, false); }

  const std::shared_ptr<internal::Node>& node() const { return node_; }

 private:
  std::shared_ptr<internal::Node> node_;
};

bool GradEnabled();

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result. The backward callback receives d(loss)/d(result) and
// is only recorded if grad mode is on and some input requires grad.
Tensor MakeResult(Matrix value, const std::vector<Tensor>& inputs,
                  std::function<void(const Matrix& grad_out)> backward);

// Adds g into t's gradient if t participates in differentiation.
void AccumulateGrad(const Tensor& t, const Matrix& g);

}  // namespace singlecodec::nn

#endif  // SINGLECODEC_NN_TENSOR_H_
