// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/train/trainer.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "grad_check.h"
#include "singlecodec/errors.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec {
namespace {

using nn::Matrix;
using nn::Tensor;

ModelConfig Small(const std::string& variant = "Single-Codec") {
  ModelConfig c = ModelConfig::Desk();
  c.model_dim = 16;
  c.quantizer.dim = 16;
  c.quantizer.codebook_size = 64;
  c.conv_hidden_dims = {8, 12, 16};
  c.conformer_dim = 16;
  c.conformer_heads = 2;
  c.conformer_layers = 1;
  c.blstm_hidden = 8;
  c.ref_conv_channels = {4, 4, 4, 4, 8, 8};
  c.ref_gru_hidden = 8;
  return BuildVariant(variant, c);
}

TrainOptions SmallOptions(int64_t disc_start) {
  TrainOptions o;
  o.discriminator.channels = {4, 4, 4, 4, 4, 1};
  o.weights.disc_start_step = disc_start;
  o.batch_size = 2;
  o.seed = 3;
  return o;
}

struct Batch {
  Matrix seg1, seg2;
};

Batch MakeBatch(const ModelConfig& c, int batch, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Batch b;
  b.seg1 = testing::RandomMatrix(batch * c.flags.ref_segment_len, c.n_mels(), rng);
  b.seg2 = testing::RandomMatrix(batch * c.seg2_frames, c.n_mels(), rng);
  return b;
}

double Checksum(const nn::Module& m) {
  double s = 0.0;
  for (const auto& [name, p] : m.NamedParameters()) {
    s += p.value().cast<double>().sum() + 0.5 * p.value().cast<double>().squaredNorm();
  }
  return s;
}

bool SameParameters(const nn::Module& a, const nn::Module& b) {
  auto pa = a.NamedParameters(), pb = b.NamedParameters();
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first) return false;
    if (pa[i].second.value() != pb[i].second.value()) return false;
  }
  return true;
}

TEST(DiscriminatorTest, PatchGridForContentSegment) {
  DiscriminatorConfig c;
  EXPECT_EQ(c.OutputSize(200, 100), std::make_pair(25, 13));
  nn::Rng rng(1);
  Discriminator d(DiscriminatorConfig::Desk(), 100, 200, rng);
  std::mt19937_64 g(2);
  Tensor logits = d.Forward(Tensor(testing::RandomMatrix(2 * 200, 100, g)), 2);
  EXPECT_EQ(logits.rows(), 2 * 25 * 13);
  EXPECT_EQ(logits.cols(), 1);
  EXPECT_THROW(d.Forward(Tensor(Matrix::Zero(199, 100)), 1), ShapeError);
}

TEST(DiscriminatorTest, RejectsBadConfig) {
  DiscriminatorConfig c;
  c.channels.pop_back();
  EXPECT_THROW(c.Validate(), ConfigError);
  c = DiscriminatorConfig();
  c.channels.back() = 2;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(HingeLossTest, KnownValues) {
  Tensor zeros(Matrix::Zero(6, 1));
  EXPECT_FLOAT_EQ(DiscriminatorHingeLoss(zeros, zeros).value()(0, 0), 2.0f);
  Tensor confident_real(Matrix::Constant(4, 1, 2.0f));
  Tensor confident_fake(Matrix::Constant(4, 1, -3.0f));
  EXPECT_FLOAT_EQ(DiscriminatorHingeLoss(confident_real, confident_fake).value()(0, 0), 0.0f);
  Matrix r(2, 1), f(2, 1);
  r << 0.5f, 3.0f;  // relu(1 - r) = 0.5, 0
  f << -0.25f, 1.0f;  // relu(1 + f) = 0.75, 2
  EXPECT_FLOAT_EQ(DiscriminatorHingeLoss(Tensor(r), Tensor(f)).value()(0, 0),
                  0.25f + 1.375f);
  EXPECT_FLOAT_EQ(GeneratorHingeLoss(Tensor(f)).value()(0, 0), -0.375f);
}

TEST(GeneratorLossTest, WeightedSumMatchesIndependentComputation) {
  ModelConfig cfg = Small();
  nn::Rng rng(4);
  Discriminator d(SmallOptions(0).discriminator, cfg.n_mels(), cfg.seg2_frames, rng);
  std::mt19937_64 g(5);
  Matrix mel_hat = testing::RandomMatrix(cfg.seg2_frames, cfg.n_mels(), g);
  Matrix seg2 = testing::RandomMatrix(cfg.seg2_frames, cfg.n_mels(), g);
  Tensor commit(Matrix::Constant(1, 1, 0.37f));
  LossWeights w;
  w.rec = 1.5f;
  w.commitment = 0.25f;
  w.adv = 0.1f;
  w.disc_start_step = 10;

  double l1 = 0.0;
  for (int i = 0; i < mel_hat.rows(); ++i) {
    for (int j = 0; j < mel_hat.cols(); ++j) l1 += std::abs(double(mel_hat(i, j)) - seg2(i, j));
  }
  l1 /= static_cast<double>(mel_hat.size());
  const Matrix logits = d.Forward(Tensor(mel_hat), 1).value();
  const double adv = -logits.cast<double>().mean();

  GeneratorLosses before = ComputeGeneratorLosses(Tensor(mel_hat), Tensor(seg2), commit,
                                                  &d, 1, 9, w);
  EXPECT_FALSE(before.adv.defined());
  EXPECT_NEAR(before.total.value()(0, 0), 1.5 * l1 + 0.25 * 0.37, 1e-5);

  GeneratorLosses after = ComputeGeneratorLosses(Tensor(mel_hat), Tensor(seg2), commit,
                                                 &d, 1, 10, w);
  ASSERT_TRUE(after.adv.defined());
  EXPECT_NEAR(after.adv.value()(0, 0), adv, 1e-5);
  EXPECT_NEAR(after.total.value()(0, 0), 1.5 * l1 + 0.25 * 0.37 + 0.1 * adv, 1e-5);
}

TEST(TrainerTest, AdversarialTermIsGatedUntilStart) {
  ModelConfig cfg = Small();
  Batch b = MakeBatch(cfg, 2, 6);
  // Before the start step the discriminator plays no part at all, so the
  // generator follows exactly the same trajectory as with a zero weight.
  TrainOptions gated = SmallOptions(3);
  TrainOptions zero = SmallOptions(1000);
  zero.weights.adv = 0.0f;
  Trainer a(cfg, gated), z(cfg, zero);
  const double disc_before = Checksum(a.discriminator());
  for (int s = 0; s < 3; ++s) {
    LossRecord ra = a.Step(b.seg1, b.seg2, 2, s);
    LossRecord rz = z.Step(b.seg1, b.seg2, 2, s);
    EXPECT_EQ(ra, rz);
    EXPECT_EQ(ra.adv, 0.0);
  }
  EXPECT_TRUE(SameParameters(a.model(), z.model()));
  EXPECT_EQ(Checksum(a.discriminator()), disc_before);
  LossRecord active = a.Step(b.seg1, b.seg2, 2, 3);
  EXPECT_NE(active.adv, 0.0);
  EXPECT_NE(Checksum(a.discriminator()), disc_before);
}

TEST(TrainerTest, DiscriminatorLossLeavesGeneratorUntouched) {
  ModelConfig cfg = Small();
  Trainer t(cfg, SmallOptions(0));
  Batch b = MakeBatch(cfg, 2, 7);
  ForwardOutput fwd = t.model().Forward(Tensor(b.seg1), Tensor(b.seg2), 2, true);
  Tensor d_loss = DiscriminatorHingeLoss(t.discriminator().Forward(Tensor(b.seg2), 2),
                                         t.discriminator().Forward(fwd.mel_hat.Detach(), 2));
  d_loss.Backward();
  for (const auto& [name, p] : t.model().NamedParameters()) {
    EXPECT_FALSE(p.has_grad()) << name;
  }
  int with_grad = 0;
  for (const auto& [name, p] : t.discriminator().NamedParameters()) with_grad += p.has_grad();
  EXPECT_GT(with_grad, 0);
}

TEST(TrainerTest, GeneratorStepDoesNotMoveDiscriminator) {
  ModelConfig cfg = Small();
  TrainOptions opts = SmallOptions(0);
  opts.adam.lr = 1e-3f;
  Trainer t(cfg, opts);
  Batch b = MakeBatch(cfg, 2, 8);
  const double gen_before = Checksum(t.model());
  t.Step(b.seg1, b.seg2, 2, 0);
  EXPECT_NE(Checksum(t.model()), gen_before);
  // Every discriminator parameter must have had its gradient cleared after
  // the generator step so its own update sees only the hinge loss.
  for (const auto& [name, p] : t.discriminator().NamedParameters()) {
    EXPECT_FALSE(p.has_grad()) << name;
  }
}

TEST(TrainerTest, DeterministicForSameSeed) {
  ModelConfig cfg = Small();
  Batch b = MakeBatch(cfg, 2, 9);
  Trainer a(cfg, SmallOptions(1)), c(cfg, SmallOptions(1));
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(a.Step(b.seg1, b.seg2, 2, s), c.Step(b.seg1, b.seg2, 2, s));
  }
  EXPECT_TRUE(SameParameters(a.model(), c.model()));
  EXPECT_TRUE(SameParameters(a.discriminator(), c.discriminator()));
  EXPECT_EQ(a.model().quantizer().codebook().vectors, c.model().quantizer().codebook().vectors);
}

TEST(TrainerTest, ZeroLearningRateFreezesWeightsButNotCodebook) {
  ModelConfig cfg = Small();
  TrainOptions opts = SmallOptions(0);
  opts.adam.lr = 0.0f;
  Trainer t(cfg, opts);
  Batch b = MakeBatch(cfg, 2, 10);
  const double gen = Checksum(t.model()), disc = Checksum(t.discriminator());
  t.Step(b.seg1, b.seg2, 2, 0);
  const Matrix cb = t.model().quantizer().codebook().vectors;
  t.Step(b.seg1, b.seg2, 2, 1);
  EXPECT_EQ(Checksum(t.model()), gen);
  EXPECT_EQ(Checksum(t.discriminator()), disc);
  EXPECT_NE(t.model().quantizer().codebook().vectors, cb);
}

TEST(TrainerTest, NonFiniteInputNamesTheBatch) {
  ModelConfig cfg = Small();
  Trainer t(cfg, SmallOptions(0));
  Batch b = MakeBatch(cfg, 2, 11);
  b.seg2(5, 3) = std::numeric_limits<float>::quiet_NaN();
  try {
    t.Step(b.seg1, b.seg2, 2, 42);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 42"), std::string::npos) << e.what();
  }
}

TEST(TrainerTest, SaveAndLoadResumesExactly) {
  ModelConfig cfg = Small();
  Batch b = MakeBatch(cfg, 2, 12);
  Trainer t(cfg, SmallOptions(1));
  t.Step(b.seg1, b.seg2, 2, 0);
  t.Step(b.seg1, b.seg2, 2, 1);
  const auto path = std::filesystem::temp_directory_path() / "singlecodec_trainer.ckpt";
  t.Save(path);
  std::unique_ptr<Trainer> r = Trainer::Load(path);
  EXPECT_EQ(r->state().step, 2);
  EXPECT_EQ(r->state().log, t.state().log);
  EXPECT_TRUE(SameParameters(r->model(), t.model()));
  EXPECT_TRUE(SameParameters(r->discriminator(), t.discriminator()));
  EXPECT_EQ(t.Step(b.seg1, b.seg2, 2, 2), r->Step(b.seg1, b.seg2, 2, 2));
  EXPECT_TRUE(SameParameters(r->model(), t.model()));
  std::filesystem::remove(path);
}

TEST(TrainerTest, ValidationL1MatchesManualReconstruction) {
  ModelConfig cfg = Small();
  Trainer t(cfg, SmallOptions(0));
  Batch b = MakeBatch(cfg, 3, 13);
  t.Step(b.seg1.topRows(2 * cfg.flags.ref_segment_len), b.seg2.topRows(2 * cfg.seg2_frames),
         2, 0);
  std::vector<SegmentPair> pairs(3);
  for (int i = 0; i < 3; ++i) {
    pairs[i].seg1.values = b.seg1.middleRows(i * cfg.flags.ref_segment_len, cfg.flags.ref_segment_len);
    pairs[i].seg2.values = b.seg2.middleRows(i * cfg.seg2_frames, cfg.seg2_frames);
  }
  double manual = 0.0;
  for (const auto& p : pairs) {
    ForwardOutput out = t.model().Forward(Tensor(p.seg1.values), Tensor(p.seg2.values), 1, false);
    manual += (out.mel_hat.value() - p.seg2.values).cwiseAbs().cast<double>().mean();
  }
  manual /= 3.0;
  EXPECT_NEAR(ValidationMelL1(t.model(), pairs, 2), manual, 1e-5);
  EXPECT_THROW(ValidationMelL1(t.model(), {}, 2), InsufficientData);
}

TEST(LossLogTest, RoundTripsExactly) {
  std::vector<LossRecord> recs = {{0, 0.1, 1.0 / 3.0, 0.0, 812.25},
                                  {1, 1e-300, 2.5e10, -0.7071067811865476, 1.0},
                                  {2, 0.30000000000000004, 0.1 + 0.2, 3.0, 7.0}};
  const auto path = std::filesystem::temp_directory_path() / "singlecodec_loss.tsv";
  WriteLossLog(path, {recs[0]});
  AppendLossLog(path, {recs[1], recs[2]});
  EXPECT_EQ(ReadLossLog(path), recs);
  nlohmann::json j = recs;
  EXPECT_EQ(j.get<std::vector<LossRecord>>(), recs);
  std::filesystem::remove(path);
}

TEST(LossLogTest, SkipsCommentsAndReportsBadLine) {
  const auto path = std::filesystem::temp_directory_path() / "singlecodec_bad_loss.tsv";
  {
    std::ofstream out(path);
    out << "# step\tcommit\trec\tadv\tppl\n\n0\t1\t2\t3\t4\n1\t1\tx\t3\t4\n";
  }
  try {
    ReadLossLog(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

CommitmentCurve CurveOf(int n, const std::function<double(int)>& f) {
  CommitmentCurve c;
  for (int i = 0; i < n; ++i) {
    c.steps.push_back(i * 10);
    c.values.push_back(f(i));
  }
  return c;
}

TEST(ConvergenceTest, ClassifiesShapes) {
  EXPECT_EQ(ClassifyConvergence(CurveOf(400, [](int i) { return 2.0 - 0.004 * i; })),
            Convergence::kConverging);
  EXPECT_EQ(ClassifyConvergence(CurveOf(400, [](int) { return 0.8; })), Convergence::kFlat);
  EXPECT_EQ(ClassifyConvergence(CurveOf(400, [](int i) { return 0.1 + 0.01 * i; })),
            Convergence::kDiverging);
  EXPECT_EQ(ClassifyConvergence(CurveOf(400, [](int i) { return 1.0 / (1.0 + i); })),
            Convergence::kConverging);
}

TEST(ConvergenceTest, InvariantToScale) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> noise(0.9, 1.1);
  std::vector<double> base(300);
  for (int i = 0; i < 300; ++i) base[i] = (1.0 + 0.002 * i) * noise(rng);
  for (double scale : {1e-4, 1.0, 37.0, 1e5}) {
    CommitmentCurve c = CurveOf(300, [&](int i) { return scale * base[i]; });
    CommitmentCurve unit = CurveOf(300, [&](int i) { return base[i]; });
    EXPECT_EQ(ClassifyConvergence(c), ClassifyConvergence(unit)) << scale;
  }
}

TEST(ConvergenceTest, RejectsShortOrInvalidCurves) {
  EXPECT_THROW(ClassifyConvergence(CurveOf(74, [](int) { return 1.0; })), InsufficientData);
  EXPECT_NO_THROW(ClassifyConvergence(CurveOf(75, [](int) { return 1.0; })));
  CommitmentCurve bad = CurveOf(100, [](int) { return 1.0; });
  bad.values[10] = std::nan("");
  EXPECT_THROW(ClassifyConvergence(bad), InvalidInput);
  bad = CurveOf(100, [](int) { return 1.0; });
  bad.steps[50] = bad.steps[49];
  EXPECT_THROW(ClassifyConvergence(bad), InvalidInput);
}

TEST(ConvergenceTest, FromLogUsesCommitmentColumn) {
  std::vector<LossRecord> recs;
  for (int i = 0; i < 100; ++i) recs.push_back({i, 1.0 / (i + 1), 5.0, 0.0, 1.0});
  CommitmentCurve c = CommitmentCurve::FromLog(recs, 10);
  EXPECT_EQ(c.values[3], 0.25);
  EXPECT_EQ(c.smoothing_window, 10);
  EXPECT_EQ(ClassifyConvergence(c), Convergence::kConverging);
}

}  // namespace
}  // namespace singlecodec
