// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/quant/quantizer.h"

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "singlecodec/errors.h"
#include "singlecodec/nn/ops.h"
#include "grad_check.h"

namespace singlecodec {
namespace {

using nn::Matrix;

std::vector<int> BruteForceCodes(const Matrix& c, const Matrix& v) {
  std::vector<int> codes;
  for (Eigen::Index t = 0; t < c.rows(); ++t) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      double d = 0.0;
      for (Eigen::Index i = 0; i < c.cols(); ++i) {
        const double diff = double(c(t, i)) - double(v(k, i));
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    codes.push_back(best);
  }
  return codes;
}

VectorQuantizer Quantizer(int k, int d, uint64_t seed = 1) {
  QuantizerConfig cfg;
  cfg.codebook_size = k;
  cfg.dim = d;
  return VectorQuantizer(cfg, seed);
}

TEST(QuantizerTest, SingleEntryCodebook) {
  VectorQuantizer vq = Quantizer(1, 4);
  std::mt19937_64 rng(3);
  QuantizationResult r = vq.Quantize(testing::RandomMatrix(10, 4, rng));
  for (int code : r.codes) EXPECT_EQ(code, 0);
  EXPECT_DOUBLE_EQ(r.perplexity, 1.0);
}

TEST(QuantizerTest, ExactMatchGivesZeroCommitment) {
  VectorQuantizer vq = Quantizer(8, 5);
  Matrix c(3, 5);
  c.row(0) = vq.codebook().vectors.row(6);
  c.row(1) = vq.codebook().vectors.row(2);
  c.row(2) = vq.codebook().vectors.row(6);
  QuantizationResult r = vq.Quantize(c);
  EXPECT_EQ(r.codes, (std::vector<int>{6, 2, 6}));
  EXPECT_EQ(r.commitment_loss, 0.0);
  EXPECT_EQ(r.quantized, c);
}

TEST(QuantizerTest, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(17);
  VectorQuantizer vq = Quantizer(8, 6);
  Matrix c = testing::RandomMatrix(16, 6, rng);
  EXPECT_EQ(vq.Quantize(c).codes, BruteForceCodes(c, vq.codebook().vectors));
}

TEST(QuantizerTest, OracleEquivalenceOverRandomInstances) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 64), dim(1, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const int t = size(rng), k = size(rng), d = dim(rng);
    VectorQuantizer vq = Quantizer(k, d, rng());
    Matrix c = testing::RandomMatrix(t, d, rng, 2.0f);
    QuantizationResult r = vq.Quantize(c);
    const std::vector<int> oracle = BruteForceCodes(c, vq.codebook().vectors);
    ASSERT_EQ(r.codes, oracle) << "trial " << trial;
    double mse = 0.0;
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < d; ++j) {
        const double diff = double(c(i, j)) - double(vq.codebook().vectors(oracle[i], j));
        mse += diff * diff;
      }
    }
    EXPECT_NEAR(r.commitment_loss, mse / (t * d), 1e-6);
  }
}

TEST(QuantizerTest, TiesGoToLowestIndex) {
  VectorQuantizer vq = Quantizer(4, 2);
  Codebook& cb = vq.mutable_codebook();
  cb.vectors << 1, 0, -1, 0, 0, 1, 1, 0;
  Matrix c(2, 2);
  c << 0, 0, 2, 0;
  // (0,0) is equidistant from codes 0, 1, 2 and 3; (2,0) from 0 and 3.
  EXPECT_EQ(vq.Quantize(c).codes, (std::vector<int>{0, 0}));
}

TEST(QuantizerTest, NonFiniteInputThrows) {
  VectorQuantizer vq = Quantizer(4, 2);
  Matrix c = Matrix::Zero(2, 2);
  c(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(vq.Quantize(c), NumericalError);
  EXPECT_THROW(vq.Quantize(Matrix::Zero(2, 3)), ShapeError);
}

TEST(QuantizerTest, CommitmentLossValuesAndGradient) {
  std::mt19937_64 rng(4);
  Matrix q = testing::RandomMatrix(5, 3, rng);
  nn::Tensor same = nn::Tensor::Parameter(q);
  EXPECT_FLOAT_EQ(CommitmentLoss(same, q).item(), 0.0f);
  nn::Tensor shifted = nn::Tensor::Parameter((q.array() + 1.0f).matrix());
  EXPECT_FLOAT_EQ(CommitmentLoss(shifted, q).item(), 1.0f);

  Matrix cv = testing::RandomMatrix(5, 3, rng);
  nn::Tensor c = nn::Tensor::Parameter(cv);
  nn::Tensor loss = CommitmentLoss(c, q);
  EXPECT_NEAR(loss.item(), (cv - q).array().square().mean(), 1e-6);
  loss.Backward();
  Matrix expected = 2.0f * (cv - q) / 15.0f;
  EXPECT_TRUE(c.grad().isApprox(expected, 1e-6f));
  EXPECT_THROW(CommitmentLoss(c, Matrix::Zero(2, 3)), ShapeError);
}

TEST(QuantizerTest, PerplexityAndUtilization) {
  EXPECT_DOUBLE_EQ(Perplexity({5, 5, 5, 5}, 8192), 1.0);
  std::vector<int> uniform(64);
  for (int i = 0; i < 64; ++i) uniform[i] = i;
  EXPECT_NEAR(Perplexity(uniform, 64), 64.0, 1e-9);
  EXPECT_DOUBLE_EQ(Utilization({0, 0, 1, 1, 2, 2, 3, 3}, 8192), 4.0 / 8192);
  EXPECT_THROW(Perplexity({}, 8), InvalidInput);
}

TEST(EmaTest, ZeroDecayCopiesAssignedMean) {
  QuantizerConfig cfg;
  cfg.codebook_size = 8;
  cfg.dim = 3;
  cfg.decay = 0.0f;
  cfg.reseed_dead_codes = false;
  VectorQuantizer vq(cfg, 5);
  Matrix c(4, 3);
  c.rowwise() = Eigen::RowVector3f(0.5f, -1.0f, 2.0f);
  std::vector<int> codes = vq.Quantize(c).codes;
  vq.EmaUpdate(c, codes, 1);
  EXPECT_TRUE(vq.codebook().vectors.row(codes[0]).isApprox(c.row(0), 1e-4f));
  EXPECT_TRUE(vq.codebook().vectors.allFinite());
}

TEST(EmaTest, ThreeStepsMatchScalarRecursion) {
  QuantizerConfig cfg;
  cfg.codebook_size = 4;
  cfg.dim = 2;
  cfg.decay = 0.9f;
  cfg.epsilon = 1e-5f;
  cfg.reseed_dead_codes = false;
  VectorQuantizer vq(cfg, 8);
  std::mt19937_64 rng(21);
  Matrix c = testing::RandomMatrix(6, 2, rng);
  const std::vector<int> codes = {0, 1, 1, 3, 0, 0};

  // Independent recursion in double: N_k, S_k tracked per code.
  std::vector<double> n(4, 1.0);
  std::vector<std::array<double, 2>> s(4);
  for (int k = 0; k < 4; ++k) {
    s[k] = {vq.codebook().vectors(k, 0), vq.codebook().vectors(k, 1)};
  }
  std::vector<std::array<double, 2>> expected(4);
  for (int step = 1; step <= 3; ++step) {
    vq.EmaUpdate(c, codes, step);
    std::vector<double> cnt(4, 0.0);
    std::vector<std::array<double, 2>> sum(4, {0.0, 0.0});
    for (int t = 0; t < 6; ++t) {
      cnt[codes[t]] += 1.0;
      sum[codes[t]][0] += c(t, 0);
      sum[codes[t]][1] += c(t, 1);
    }
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
      n[k] = 0.9 * n[k] + 0.1 * cnt[k];
      s[k][0] = 0.9 * s[k][0] + 0.1 * sum[k][0];
      s[k][1] = 0.9 * s[k][1] + 0.1 * sum[k][1];
      total += n[k];
    }
    for (int k = 0; k < 4; ++k) {
      const double smoothed = (n[k] + 1e-5) / (total + 4e-5) * total;
      expected[k] = {s[k][0] / smoothed, s[k][1] / smoothed};
    }
  }
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(vq.codebook().ema_cluster_size[k], n[k], 1e-5);
    EXPECT_NEAR(vq.codebook().vectors(k, 0), expected[k][0], 1e-5);
    EXPECT_NEAR(vq.codebook().vectors(k, 1), expected[k][1], 1e-5);
  }
}

TEST(EmaTest, UnusedCodeStaysFinite) {
  QuantizerConfig cfg;
  cfg.codebook_size = 3;
  cfg.dim = 2;
  cfg.reseed_dead_codes = false;
  VectorQuantizer vq(cfg, 2);
  Matrix c = Matrix::Ones(5, 2);
  for (int step = 1; step <= 2000; ++step) {
    vq.EmaUpdate(c, {0, 0, 0, 0, 0}, step);
  }
  EXPECT_TRUE(vq.codebook().vectors.allFinite());
  EXPECT_GE(vq.codebook().ema_cluster_size.minCoeff(), 0.0f);
}

TEST(EmaTest, DeadCodesAreReseededFromBatch) {
  QuantizerConfig cfg;
  cfg.codebook_size = 3;
  cfg.dim = 2;
  cfg.dead_code_steps = 5;
  VectorQuantizer vq(cfg, 2);
  Matrix c(2, 2);
  c << 7, 7, 9, 9;
  for (int step = 1; step <= 5; ++step) vq.EmaUpdate(c, {0, 0}, step);
  for (int k = 1; k < 3; ++k) {
    const auto row = vq.codebook().vectors.row(k);
    EXPECT_TRUE(row.isApprox(c.row(0)) || row.isApprox(c.row(1))) << row;
  }
}

TEST(QuantizerTest, InitializationDrawsFromLatents) {
  VectorQuantizer vq = Quantizer(16, 3);
  Matrix c(2, 3);
  c << 10, 10, 10, -10, -10, -10;
  auto out = vq.QuantizeForTraining(nn::Tensor::Parameter(c));
  EXPECT_TRUE(vq.codebook().initialized);
  for (int k = 0; k < 16; ++k) {
    const auto row = vq.codebook().vectors.row(k);
    EXPECT_TRUE(row.isApprox(c.row(0), 1e-2f) || row.isApprox(c.row(1), 1e-2f));
  }
  EXPECT_LT(out.result.commitment_loss, 1e-2);
}

// Straight-through on a toy chain x -> W1 -> c -> VQ -> q -> W2 -> loss.
TEST(StraightThroughTest, GradientCopiedFromQuantizedToLatent) {
  std::mt19937_64 rng(12);
  VectorQuantizer vq = Quantizer(8, 4);
  Matrix x = testing::RandomMatrix(6, 3, rng);
  nn::Tensor w1 = nn::Tensor::Parameter(testing::RandomMatrix(3, 4, rng));
  nn::Tensor w2 = nn::Tensor::Parameter(testing::RandomMatrix(4, 2, rng));
  Matrix target = testing::RandomMatrix(6, 2, rng);

  nn::Tensor c = nn::MatMul(nn::Tensor(x), w1);
  auto out = vq.QuantizeForTraining(c);
  nn::Tensor recon = nn::MatMul(out.straight_through, w2);
  nn::Tensor loss = nn::MeanSquaredError(recon, nn::Tensor(target));
  // Keep c's gradient around by hooking a leaf on the same values.
  nn::Tensor c_leaf = nn::Tensor::Parameter(c.value());
  nn::Tensor st_leaf = nn::StraightThrough(c_leaf, out.result.quantized);
  nn::Tensor q_leaf = nn::Tensor::Parameter(out.result.quantized);
  nn::MeanSquaredError(nn::MatMul(st_leaf, w2), nn::Tensor(target)).Backward();
  const Matrix grad_c = c_leaf.grad();
  w2.ZeroGrad();
  nn::MeanSquaredError(nn::MatMul(q_leaf, w2), nn::Tensor(target)).Backward();
  EXPECT_EQ(grad_c, q_leaf.grad());
  loss.Backward();
  EXPECT_TRUE(w1.has_grad());
}

}  // namespace
}  // namespace singlecodec
