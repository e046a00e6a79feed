// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/cli/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "singlecodec/codec_io/bitstream.h"
#include "singlecodec/codec_io/npy.h"
#include "singlecodec/train/loss_log.h"

namespace singlecodec {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result RunCommand(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "singlecodec_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.json")
        << R"({"model_dim":16,"conv_hidden_dims":[8,12,16],"conformer_dim":16,)"
           R"("conformer_heads":2,"conformer_layers":1,"blstm_hidden":8,)"
           R"("ref_conv_channels":[4,4,4,4,8,8],"ref_gru_hidden":8,)"
           R"("quantizer":{"dim":16,"codebook_size":64}})";
    ASSERT_EQ(RunCommand({"corpus", "--out", P("corpus"), "--seconds", "20"}).code, 0);
    Result r = RunCommand({"train", "--manifest", P("corpus/manifest.tsv"), "--steps", "3",
                    "--batch-size", "2", "--model-config", P("tiny.json"), "--out",
                    P("m.ckpt"), "--holdout", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string P(const std::string& name) { return (dir_ / name).string(); }
  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, TrainWritesCheckpointAndLog) {
  EXPECT_TRUE(fs::exists(P("m.ckpt")));
  EXPECT_EQ(ReadLossLog(P("m.ckpt.loss.tsv")).size(), 3u);
}

TEST_F(CliTest, EncodeDecodeIsDeterministic) {
  const std::string wav = P("corpus/utt_0000.wav");
  ASSERT_EQ(RunCommand({"encode", "--ckpt", P("m.ckpt"), "--wav", wav, "--out", P("a.sc")}).code, 0);
  ASSERT_EQ(RunCommand({"encode", "--ckpt", P("m.ckpt"), "--wav", wav, "--out", P("b.sc")}).code, 0);
  EXPECT_EQ(ReadAll(P("a.sc")), ReadAll(P("b.sc")));
  const TokenStream s = ReadTokenFile(P("a.sc"));
  EXPECT_EQ(s.codes.size() % 50, 0u);
  Result d = RunCommand({"decode", "--ckpt", P("m.ckpt"), "--tokens", P("a.sc"), "--out-mel",
                  P("a.npy"), "--griffin-lim-wav", P("a.wav"), "--iterations", "2"});
  ASSERT_EQ(d.code, 0) << d.err;
  ASSERT_EQ(RunCommand({"decode", "--ckpt", P("m.ckpt"), "--tokens", P("a.sc"), "--out-mel",
                 P("b.npy")}).code, 0);
  EXPECT_EQ(ReadAll(P("a.npy")), ReadAll(P("b.npy")));
  const nn::Matrix mel = ReadNpy(P("a.npy"));
  EXPECT_EQ(mel.rows(), static_cast<int>(s.codes.size() / 50 * 200 - s.pad_frames));
  EXPECT_TRUE(fs::exists(P("a.wav")));
}

TEST_F(CliTest, EvalReportsEveryUtteranceAndMean) {
  Result r = RunCommand({"eval", "--ckpt", P("m.ckpt"), "--manifest", P("corpus/manifest.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_GE(rows, 3);
  EXPECT_EQ(last.substr(0, 5), "mean\t");
}

TEST_F(CliTest, AblateReportsAllVariants) {
  Result r = RunCommand({"ablate", "--manifest", P("corpus/manifest.tsv"), "--model-config",
                  P("tiny.json"), "--report", P("ablate.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(ReadAll(P("ablate.tsv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, AblationHeader());
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.substr(0, line.find('\t')), VariantNames()[rows]);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST_F(CliTest, CurvesClassifiesInverseDecay) {
  std::vector<LossRecord> log;
  for (int i = 0; i < 400; ++i) log.push_back({i, 1.0 / (1.0 + i), 1.0, 0.0, 10.0});
  WriteLossLog(P("inv.tsv"), log);
  Result r = RunCommand({"curves", "--log", P("inv.tsv"), "--classify"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "converging\n");
}

TEST_F(CliTest, FailuresPrintOneCodedLine) {
  auto check = [](const Result& r, const std::string& code) {
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.err.rfind("error " + code + ": ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  };
  check(RunCommand({}), "UsageError");
  check(RunCommand({"train", "--manifest", "x"}), "UsageError");
  check(RunCommand({"encode", "--ckpt", P("missing.ckpt"), "--wav", "x", "--out", "y"}), "IoError");
  std::ofstream(P("garbage.sc")) << "not a token stream";
  check(RunCommand({"decode", "--ckpt", P("m.ckpt"), "--tokens", P("garbage.sc"), "--out-mel",
             P("g.npy")}),
        "FormatError");
  check(RunCommand({"train", "--manifest", P("corpus/manifest.tsv"), "--variant", "Ref-Bogus",
             "--out", P("x.ckpt")}),
        "ConfigError");
  std::ofstream(P("short.tsv")) << "0\t1\t1\t0\t1\n";
  check(RunCommand({"curves", "--log", P("short.tsv"), "--classify"}), "InsufficientData");
}

}  // namespace
}  // namespace singlecodec
