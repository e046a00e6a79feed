// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "grad_check.h"
#include "singlecodec/errors.h"

namespace singlecodec {
namespace {

using nn::Matrix;

const double kMcdConstant = 10.0 * std::sqrt(2.0) / std::log(10.0);

// Direct triple loop in long double.
double McdOracle(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.cols());
  const long double pi = std::acos(-1.0L);
  long double total = 0.0L;
  for (int t = 0; t < a.rows(); ++t) {
    long double sq = 0.0L;
    for (int k = 1; k <= 13; ++k) {
      long double ca = 0.0L, cb = 0.0L;
      for (int i = 0; i < n; ++i) {
        const long double w = std::sqrt(2.0L / n) * std::cos(pi / n * (i + 0.5L) * k);
        ca += w * a(t, i);
        cb += w * b(t, i);
      }
      sq += (ca - cb) * (ca - cb);
    }
    total += std::sqrt(sq);
  }
  return static_cast<double>(total / a.rows() * 10.0L * std::sqrt(2.0L) / std::log(10.0L));
}

Matrix Random(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testing::RandomMatrix(rows, cols, rng);
}

TEST(McdTest, ZeroForIdenticalInputs) {
  Matrix a = Random(40, 100, 1);
  EXPECT_EQ(Mcd(a, a), 0.0);
}

TEST(McdTest, MatchesDirectOracle) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Matrix a = Random(17, 100, 10 + seed), b = Random(17, 100, 20 + seed);
    EXPECT_NEAR(Mcd(a, b), McdOracle(a, b), 1e-9 * McdOracle(a, b));
  }
}

TEST(McdTest, SingleCoefficientClosedForm) {
  const int n = 100;
  for (double delta : {0.001, 0.37, -1.25, 4.0}) {
    Matrix a = Random(1, n, 3);
    Matrix b = a;
    for (int i = 0; i < n; ++i) {
      b(0, i) += static_cast<float>(delta * std::sqrt(2.0 / n) *
                                    std::cos(M_PI / n * (i + 0.5) * 1));
    }
    // float storage of b perturbs the other coefficients by ~1e-7.
    const Eigen::MatrixXd ca = LogMelCepstrum(a, 14), cb = LogMelCepstrum(b, 14);
    const double actual_delta = cb(0, 1) - ca(0, 1);
    EXPECT_NEAR(actual_delta, delta, 1e-6);
    EXPECT_NEAR(Mcd(a, b), kMcdConstant * std::abs(delta), 1e-5 + 1e-6 * std::abs(delta));
  }
  // Exact closed form on the cepstral side, free of float storage effects.
  Matrix a = Matrix::Zero(1, 14), b = Matrix::Zero(1, 14);
  Eigen::MatrixXd basis = LogMelCepstrum(Matrix::Identity(14, 14), 14);
  for (int i = 0; i < 14; ++i) b(0, i) = static_cast<float>(0.5 * basis(i, 1));
  EXPECT_NEAR(Mcd(a, b), kMcdConstant * 0.5, 1e-6);
}

TEST(McdTest, ZerothCoefficientIsExcluded) {
  Matrix a = Random(30, 100, 4);
  Matrix b = a;
  for (int t = 0; t < b.rows(); ++t) b.row(t).array() += static_cast<float>(0.25 * t - 3.0);
  EXPECT_NEAR(Mcd(a, b), 0.0, 1e-4);
}

TEST(McdTest, SymmetricAndLinearAlongDirection) {
  Matrix a = Random(25, 100, 5), b = Random(25, 100, 6);
  EXPECT_DOUBLE_EQ(Mcd(a, b), Mcd(b, a));
  Matrix delta = Random(25, 100, 7);
  for (int t = 0; t < delta.rows(); ++t) delta.row(t).array() -= delta.row(t).mean();
  const double unit = Mcd(a, a + delta);
  for (float t : {0.5f, 2.0f, 3.0f}) {
    Matrix shifted = a + t * delta;
    EXPECT_NEAR(Mcd(a, shifted), t * unit, 1e-4 * t * unit) << t;
  }
}

TEST(McdTest, ShapeMismatchThrows) {
  EXPECT_THROW(Mcd(Matrix::Zero(3, 100), Matrix::Zero(4, 100)), ShapeError);
  EXPECT_THROW(Mcd(Matrix::Zero(3, 100), Matrix::Zero(3, 99)), ShapeError);
}

TEST(MelL1Test, Values) {
  Matrix a = Random(20, 100, 8);
  EXPECT_EQ(MelL1(a, a), 0.0);
  EXPECT_NEAR(MelL1(a, (a.array() + 1.0f).matrix()), 1.0, 1e-6);
  Matrix b = Random(20, 100, 9);
  double oracle = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) oracle += std::fabs(double(a(i, j)) - double(b(i, j)));
  }
  EXPECT_NEAR(MelL1(a, b), oracle / a.size(), 1e-12);
  EXPECT_THROW(MelL1(a, b.topRows(10)), ShapeError);
}

TEST(SpeakerProxyTest, SelfAndPermutation) {
  Matrix a = Random(120, 100, 10);
  EXPECT_NEAR(SpeakerCosineProxy(a, a), 1.0, 1e-12);
  std::vector<int> order(a.rows());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(11));
  Matrix p(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) p.row(i) = a.row(order[i]);
  EXPECT_NEAR(SpeakerCosineProxy(a, p), 1.0, 1e-9);
}

TEST(SpeakerProxyTest, NegationFlipsMeanComponent) {
  Matrix a = Random(80, 100, 12);
  a.array() += 2.0f;
  Matrix neg = -a;
  const Eigen::VectorXd ea = SpeakerEmbedding(a), en = SpeakerEmbedding(neg);
  const Eigen::VectorXd ma = ea.head(100), mn = en.head(100);
  EXPECT_NEAR(ma.dot(mn) / (ma.norm() * mn.norm()), -1.0, 1e-12);
  EXPECT_TRUE(ea.tail(100).isApprox(en.tail(100), 1e-9));
}

TEST(SpeakerProxyTest, BoundedAndNeedsFrames) {
  for (uint64_t s = 0; s < 20; ++s) {
    const double c = SpeakerCosineProxy(Random(60, 100, 100 + s), Random(60, 100, 200 + s));
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
  }
  EXPECT_THROW(SpeakerCosineProxy(Random(49, 100, 1), Random(60, 100, 2)), InsufficientData);
}

TEST(BandwidthTest, PaperRows) {
  const double bps = Bandwidth(24000, 256, 4, 8192);
  EXPECT_EQ(bps, 304.6875);
  EXPECT_EQ(ReportedBandwidth(bps), 304);
  EXPECT_EQ(Bandwidth(24000, 320, 1, 1024), 750.0);
  EXPECT_EQ(ReportedBandwidth(Bandwidth(24000, 320, 1, 1024)), 750);
}

TEST(BandwidthTest, MultiplicativeInCodeBits) {
  const double one_bit = Bandwidth(24000, 256, 4, 2);
  EXPECT_EQ(one_bit, 23.4375);
  for (int bits = 1; bits <= 20; ++bits) {
    EXPECT_EQ(Bandwidth(24000, 256, 4, int64_t{1} << bits), bits * one_bit);
  }
  EXPECT_EQ(CodeBits(1000), 10);
  EXPECT_EQ(CodeBits(1025), 11);
  EXPECT_THROW(Bandwidth(0, 256, 4, 8192), InvalidInput);
}

TEST(MetricReportTest, TsvWithAggregate) {
  MetricReport a{"u1", 304.6875, 2.0, 0.5, 0.25, 30.0, 0.1, std::nullopt, 2.5, std::nullopt};
  MetricReport b{"u2", 304.6875, 4.0, 0.7, 0.75, 50.0, 0.3, std::nullopt, 3.5, std::nullopt};
  MetricReport m = AggregateReports({a, b});
  EXPECT_DOUBLE_EQ(m.mcd, 3.0);
  EXPECT_DOUBLE_EQ(m.mel_l1, 0.5);
  ASSERT_TRUE(m.pesq.has_value());
  EXPECT_DOUBLE_EQ(*m.pesq, 3.0);
  EXPECT_FALSE(m.stoi.has_value());
  std::ostringstream out;
  WriteMetricReports(out, {a, b});
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].substr(0, 16), "id\tbandwidth_bps");
  EXPECT_EQ(lines[3].substr(0, 9), "mean\t304\t");
  EXPECT_NE(lines[1].find("\t-\t2.5000\t-\t"), std::string::npos) << lines[1];
}

}  // namespace
}  // namespace singlecodec
