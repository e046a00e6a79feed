// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/nn/module.h"

#include <algorithm>
#include <cmath>

namespace singlecodec::nn {

Matrix UniformInit(int rows, int cols, int fan_in, Rng& rng) {
  const float bound = 1.0f / std::sqrt(static_cast<float>(std::max(fan_in, 1)));
  std::uniform_real_distribution<float> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

std::vector<NamedTensor> Module::NamedParameters() const {
  std::vector<NamedTensor> out;
  Collect("", out);
  return out;
}

std::vector<Tensor> Module::Parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : NamedParameters()) out.push_back(t);
  return out;
}

int64_t Module::ParameterCount() const {
  int64_t n = 0;
  for (auto& [name, t] : NamedParameters()) n += t.value().size();
  return n;
}

void Module::ZeroGrad() {
  for (auto& t : Parameters()) t.ZeroGrad();
}

Tensor Module::RegisterParameter(const std::string& name, Matrix init) {
  Tensor t = Tensor::Parameter(std::move(init));
  params_.emplace_back(name, t);
  return t;
}

void Module::RegisterModule(const std::string& name, Module* child) {
  children_.emplace_back(name, child);
}

void Module::Collect(const std::string& prefix,
                     std::vector<NamedTensor>& out) const {
  for (const auto& [name, t] : params_) out.emplace_back(prefix + name, t);
  for (const auto& [name, child] : children_) {
    child->Collect(prefix + name + ".", out);
  }
}

}  // namespace singlecodec::nn
