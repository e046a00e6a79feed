// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "grad_check.h"
#include "singlecodec/errors.h"
#include "singlecodec/nn/adam.h"
#include "singlecodec/nn/layers.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec::nn {
namespace {

using testing::ExpectGradientsMatch;
using testing::RandomMatrix;

class OpsGradientTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{1234};
};

TEST_F(OpsGradientTest, ElementwiseAndLinear) {
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) {
        return Linear(Mul(Add(v[0], v[1]), Sub(v[0], v[1])), v[2], v[3]);
      },
      {RandomMatrix(5, 4, rng_), RandomMatrix(5, 4, rng_),
       RandomMatrix(4, 3, rng_), RandomMatrix(1, 3, rng_)});
}

TEST_F(OpsGradientTest, Activations) {
  ExpectGradientsMatch([](const std::vector<Tensor>& v) { return Silu(v[0]); },
                       {RandomMatrix(4, 6, rng_)});
  ExpectGradientsMatch([](const std::vector<Tensor>& v) { return Tanh(v[0]); },
                       {RandomMatrix(4, 6, rng_)});
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return Sigmoid(v[0]); },
      {RandomMatrix(4, 6, rng_)});
  ExpectGradientsMatch([](const std::vector<Tensor>& v) { return Glu(v[0]); },
                       {RandomMatrix(4, 6, rng_)});
  // Keep probes away from the kink at zero.
  Matrix x = RandomMatrix(4, 6, rng_);
  x = x.unaryExpr([](float v) { return v + (v >= 0.0f ? 0.1f : -0.1f); });
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return LeakyRelu(v[0], 0.2f); }, {x});
}

TEST_F(OpsGradientTest, StructuralOps) {
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) {
        Tensor c = ConcatCols(v[0], v[1]);
        return Reshape(SliceCols(c, 1, 4), 2, 12);
      },
      {RandomMatrix(6, 3, rng_), RandomMatrix(6, 2, rng_)});
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return BroadcastOverTime(v[0], 5); },
      {RandomMatrix(3, 4, rng_)});
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) {
        return RepeatTime(AvgPoolTime(v[0], 2), 3);
      },
      {RandomMatrix(8, 3, rng_)});
}

TEST_F(OpsGradientTest, Losses) {
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return MeanSquaredError(v[0], v[1]); },
      {RandomMatrix(4, 5, rng_), RandomMatrix(4, 5, rng_)});
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return MeanAbsError(v[0], v[1]); },
      {RandomMatrix(4, 5, rng_), RandomMatrix(4, 5, rng_)});
}

TEST_F(OpsGradientTest, Convolutions) {
  const int batch = 2;
  ExpectGradientsMatch(
      [batch](const std::vector<Tensor>& v) {
        return Conv1d(v[0], v[1], v[2], batch, 4, 2, 1);
      },
      {RandomMatrix(batch * 8, 3, rng_), RandomMatrix(4 * 3, 5, rng_),
       RandomMatrix(1, 5, rng_)});
  ExpectGradientsMatch(
      [batch](const std::vector<Tensor>& v) {
        return ConvTranspose1d(v[0], v[1], v[2], batch, 4, 2, 1);
      },
      {RandomMatrix(batch * 4, 3, rng_), RandomMatrix(3, 4 * 5, rng_),
       RandomMatrix(1, 5, rng_)});
  ExpectGradientsMatch(
      [batch](const std::vector<Tensor>& v) {
        return DepthwiseConv1d(v[0], v[1], v[2], batch, 5);
      },
      {RandomMatrix(batch * 7, 3, rng_), RandomMatrix(5, 3, rng_),
       RandomMatrix(1, 3, rng_)});
  Conv2dGeometry geom{.height = 6, .width = 5, .kernel_h = 3, .kernel_w = 3,
                      .stride_h = 2, .stride_w = 2, .pad_h = 1, .pad_w = 1};
  ExpectGradientsMatch(
      [batch, geom](const std::vector<Tensor>& v) {
        return Conv2d(v[0], v[1], v[2], batch, geom);
      },
      {RandomMatrix(batch * 30, 2, rng_), RandomMatrix(9 * 2, 3, rng_),
       RandomMatrix(1, 3, rng_)});
}

TEST_F(OpsGradientTest, LayerNormAndAttention) {
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) { return LayerNorm(v[0], v[1], v[2]); },
      {RandomMatrix(5, 6, rng_), RandomMatrix(1, 6, rng_),
       RandomMatrix(1, 6, rng_)});
  ExpectGradientsMatch(
      [](const std::vector<Tensor>& v) {
        return MultiHeadAttention(v[0], v[1], v[2], 2, 2);
      },
      {RandomMatrix(8, 4, rng_), RandomMatrix(8, 4, rng_),
       RandomMatrix(8, 4, rng_)});
}

TEST_F(OpsGradientTest, Recurrent) {
  const int batch = 2;
  const int hidden = 3;
  for (bool reverse : {false, true}) {
    ExpectGradientsMatch(
        [batch, reverse](const std::vector<Tensor>& v) {
          return Lstm(v[0], v[1], v[2], v[3], batch, reverse);
        },
        {RandomMatrix(batch * 5, 2, rng_), RandomMatrix(2, 4 * hidden, rng_),
         RandomMatrix(hidden, 4 * hidden, rng_),
         RandomMatrix(1, 4 * hidden, rng_)});
  }
  ExpectGradientsMatch(
      [batch](const std::vector<Tensor>& v) {
        return GruFinalState(v[0], v[1], v[2], v[3], v[4], batch);
      },
      {RandomMatrix(batch * 5, 2, rng_), RandomMatrix(2, 3 * hidden, rng_),
       RandomMatrix(hidden, 3 * hidden, rng_), RandomMatrix(1, 3 * hidden, rng_),
       RandomMatrix(1, 3 * hidden, rng_)});
}

TEST(OpsForwardTest, Conv1dMatchesDirectLoop) {
  std::mt19937_64 rng(3);
  const int batch = 2, time = 9, cin = 3, cout = 4, kernel = 3, stride = 2,
            pad = 1;
  Matrix x = RandomMatrix(batch * time, cin, rng);
  Matrix w = RandomMatrix(kernel * cin, cout, rng);
  Matrix b = RandomMatrix(1, cout, rng);
  Matrix y = Conv1d(Tensor(x), Tensor(w), Tensor(b), batch, kernel, stride, pad)
                 .value();
  const int tout = (time + 2 * pad - kernel) / stride + 1;
  ASSERT_EQ(y.rows(), batch * tout);
  for (int bi = 0; bi < batch; ++bi) {
    for (int t = 0; t < tout; ++t) {
      for (int o = 0; o < cout; ++o) {
        double acc = b(0, o);
        for (int k = 0; k < kernel; ++k) {
          const int src = t * stride - pad + k;
          if (src < 0 || src >= time) continue;
          for (int c = 0; c < cin; ++c) {
            acc += x(bi * time + src, c) * w(k * cin + c, o);
          }
        }
        EXPECT_NEAR(y(bi * tout + t, o), acc, 1e-5);
      }
    }
  }
}

TEST(OpsForwardTest, AttentionOfConstantValuesIsConstant) {
  std::mt19937_64 rng(5);
  Matrix q = RandomMatrix(6, 4, rng);
  Matrix k = RandomMatrix(6, 4, rng);
  Matrix v = Matrix::Constant(6, 4, 2.5f);
  Matrix y = MultiHeadAttention(Tensor(q), Tensor(k), Tensor(v), 1, 2).value();
  EXPECT_TRUE(y.isApproxToConstant(2.5f, 1e-6f));
}

TEST(OpsForwardTest, ShapeErrors) {
  Tensor a(Matrix::Zero(3, 2));
  Tensor b(Matrix::Zero(2, 3));
  EXPECT_THROW(Add(a, b), ShapeError);
  EXPECT_THROW(AvgPoolTime(a, 2), ShapeError);
  EXPECT_THROW(Reshape(a, 4, 2), ShapeError);
  EXPECT_THROW(a.Backward(), ShapeError);
}

TEST(TensorTest, NoGradGuardSkipsGraph) {
  Tensor p = Tensor::Parameter(Matrix::Ones(2, 2));
  {
    NoGradGuard guard;
    Tensor y = Scale(p, 3.0f);
    EXPECT_FALSE(y.requires_grad());
  }
  Tensor y = Scale(p, 3.0f);
  EXPECT_TRUE(y.requires_grad());
}

TEST(TensorTest, GradientsAccumulateAcrossUses) {
  Tensor p = Tensor::Parameter(Matrix::Constant(1, 1, 2.0f));
  Tensor y = Mul(p, p);  // d/dp p^2 = 2p
  y.Backward();
  EXPECT_FLOAT_EQ(p.grad()(0, 0), 4.0f);
}

TEST(AdamTest, ZeroLearningRateLeavesParameters) {
  std::mt19937_64 rng(1);
  Tensor p = Tensor::Parameter(RandomMatrix(3, 3, rng));
  const Matrix before = p.value();
  Adam opt({p}, AdamOptions{.lr = 0.0f});
  Mean(Mul(p, p)).Backward();
  opt.Step();
  EXPECT_EQ(p.value(), before);
}

TEST(AdamTest, MinimisesQuadratic) {
  Tensor p = Tensor::Parameter(Matrix::Constant(1, 4, 5.0f));
  Adam opt({p}, AdamOptions{.lr = 0.1f, .beta1 = 0.9f, .beta2 = 0.999f});
  for (int i = 0; i < 500; ++i) {
    opt.ZeroGrad();
    Mean(Mul(p, p)).Backward();
    opt.Step();
  }
  EXPECT_LT(p.value().cwiseAbs().maxCoeff(), 0.05f);
}

TEST(LayersTest, BiLstmOutputWidth) {
  Rng rng(2);
  BiLstm lstm(6, 4, 2, rng);
  Tensor x(RandomMatrix(3 * 7, 6, rng));
  Tensor y = lstm.Forward(x, 3);
  EXPECT_EQ(y.rows(), 21);
  EXPECT_EQ(y.cols(), 8);
  EXPECT_EQ(lstm.NamedParameters().size(), 12u);
}

}  // namespace
}  // namespace singlecodec::nn
