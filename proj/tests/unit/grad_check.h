// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-difference gradient checker shared by the unit tests.

#ifndef SINGLECODEC_TESTS_GRAD_CHECK_H_
#define SINGLECODEC_TESTS_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "singlecodec/nn/ops.h"

namespace singlecodec::testing {

using nn::Matrix;
using nn::Tensor;

inline Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng,
                           float scale = 1.0f) {
  std::normal_distribution<float> dist(0.0f, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// Projects f's output onto a fixed random direction R and compares the
// analytic gradient of <R, f(x)> with central differences, element by
// element, on up to `max_probes` entries per input.
inline void ExpectGradientsMatch(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    const std::vector<Matrix>& inputs, double tol = 2e-2, float eps = 1e-2f,
    int max_probes = 24, uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::vector<Tensor> params;
  for (const Matrix& m : inputs) params.push_back(Tensor::Parameter(m));
  Tensor y = f(params);
  const Matrix dir = RandomMatrix(static_cast<int>(y.rows()),
                                  static_cast<int>(y.cols()), rng);
  Tensor loss = nn::Mean(nn::Mul(y, Tensor(dir)));
  loss.Backward();
  const double n = static_cast<double>(y.value().size());

  auto project = [&](const std::vector<Tensor>& xs) {
    nn::NoGradGuard guard;
    Matrix out = f(xs).value();
    return (out.cast<double>().array() * dir.cast<double>().array()).sum();
  };

  for (size_t i = 0; i < inputs.size(); ++i) {
    const Matrix analytic = params[i].grad() * static_cast<float>(n);
    const Eigen::Index size = inputs[i].size();
    std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
    const int probes = static_cast<int>(std::min<Eigen::Index>(size, max_probes));
    for (int p = 0; p < probes; ++p) {
      const Eigen::Index idx = size <= max_probes ? p : pick(rng);
      std::vector<Tensor> xs;
      for (const Matrix& m : inputs) xs.push_back(Tensor(m));
      const float orig = inputs[i].data()[idx];
      xs[i].mutable_value().data()[idx] = orig + eps;
      const double up = project(xs);
      xs[i].mutable_value().data()[idx] = orig - eps;
      const double down = project(xs);
      const double fd = (up - down) / (2.0 * eps);
      const double a = analytic.data()[idx];
      EXPECT_NEAR(a, fd, tol * std::max({1.0, std::abs(a), std::abs(fd)}))
          << "input " << i << " element " << idx;
    }
  }
}

}  // namespace singlecodec::testing

#endif  // SINGLECODEC_TESTS_GRAD_CHECK_H_
