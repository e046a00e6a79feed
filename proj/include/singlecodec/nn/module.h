// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_NN_MODULE_H_
#define SINGLECODEC_NN_MODULE_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "singlecodec/nn/tensor.h"

namespace singlecodec::nn {

using Rng = std::mt19937_64;

// Uniform(-bound, bound) initialiser with bound = 1 / sqrt(fan_in).
Matrix UniformInit(int rows, int cols, int fan_in, Rng& rng);

using NamedTensor = std::pair<std::string, Tensor>;

// Owner of a parameter subtree. Submodules are members of the derived class
// and are registered by address, so modules are neither copyable nor movable.
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  // Depth-first, registration order, dotted names ("enc.blocks.0.conv.w").
  std::vector<NamedTensor> NamedParameters() const;
  std::vector<Tensor> Parameters() const;
  int64_t ParameterCount() const;
  void ZeroGrad();

 protected:
  Tensor RegisterParameter(const std::string& name, Matrix init);
  void RegisterModule(const std::string& name, Module* child);

 private:
  void Collect(const std::string& prefix, std::vector<NamedTensor>& out) const;

  std::vector<NamedTensor> params_;
  std::vector<std::pair<std::string, Module*>> children_;
};

}  // namespace singlecodec::nn

#endif  // SINGLECODEC_NN_MODULE_H_
