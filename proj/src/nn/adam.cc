// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/nn/adam.h"

#include <cmath>

namespace singlecodec::nn {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const Tensor& p : params_) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::Step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  const float step_size = static_cast<float>(options_.lr / bc1);
  const float inv_bc2_sqrt = static_cast<float>(1.0 / std::sqrt(bc2));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;
    const Matrix& g = p.mutable_grad();
    m_[i] = options_.beta1 * m_[i] + (1.0f - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] +
            (1.0f - options_.beta2) * g.cwiseProduct(g);
    p.mutable_value().array() -=
        step_size * m_[i].array() /
        (v_[i].array().sqrt() * inv_bc2_sqrt + options_.eps);
  }
}

void Adam::ZeroGrad() {
  for (Tensor& p : params_) p.ZeroGrad();
}

}  // namespace singlecodec::nn
