// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_NN_ADAM_H_
#define SINGLECODEC_NN_ADAM_H_

#include <cstdint>
#include <vector>

#include "singlecodec/nn/tensor.h"

namespace singlecodec::nn {

struct AdamOptions {
  float lr = 2e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.95f;
  float eps = 1e-8f;
};

// Adaptive-moment optimiser over a fixed parameter list. Parameters without
// a gradient are left untouched, moments included.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  void Step();
  void ZeroGrad();

  const AdamOptions& options() const { return options_; }
  int64_t step_count() const { return step_; }

  // Moment buffers are exposed for checkpointing.
  std::vector<Matrix>& first_moments() { return m_; }
  std::vector<Matrix>& second_moments() { return v_; }
  void set_step_count(int64_t step) { step_ = step; }

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::vector<Matrix> m_, v_;
  int64_t step_ = 0;
};

}  // namespace singlecodec::nn

#endif  // SINGLECODEC_NN_ADAM_H_
