// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/cli/cli.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "singlecodec/audio/griffin_lim.h"
#include "singlecodec/audio/wav.h"
#include "singlecodec/codec_io/bitstream.h"
#include "singlecodec/codec_io/npy.h"
#include "singlecodec/codec_io/pipeline.h"
#include "singlecodec/data/synth_corpus.h"
#include "singlecodec/errors.h"
#include "singlecodec/model/checkpoint.h"
#include "singlecodec/train/trainer.h"

namespace singlecodec {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kValidationSeed = 0x5eed;

struct ModelArgs {
  std::string preset = "desk";
  std::string model_config;
  int batch_size = 16;
  int64_t disc_start = -1;
  float lr = 2e-4f;
  uint64_t seed = 0;
  int holdout = 10;

  void Add(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Model size: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--model-config", model_config, "JSON model config (overrides --preset)");
    cmd->add_option("--batch-size", batch_size, "Segment pairs per step")->check(CLI::PositiveNumber);
    cmd->add_option("--disc-start", disc_start, "First step with the adversarial term");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--seed", seed, "Seed for initialisation and batching");
    cmd->add_option("--holdout", holdout, "Hold out every N-th utterance for validation (0: none)");
  }

  ModelConfig Base() const {
    ModelConfig c = preset == "paper" ? ModelConfig() : ModelConfig::Desk();
    if (!model_config.empty()) {
      std::ifstream in(model_config);
      if (!in) throw IoError("cannot open " + model_config);
      try {
        c = nlohmann::json::parse(in).get<ModelConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(model_config + ": " + e.what());
      }
    }
    return c;
  }

  TrainOptions Options() const {
    TrainOptions o = preset == "paper" ? TrainOptions() : TrainOptions::Desk();
    o.batch_size = batch_size;
    if (disc_start >= 0) o.weights.disc_start_step = disc_start;
    o.adam.lr = lr;
    o.seed = seed;
    return o;
  }
};

struct Split {
  DatasetManifest train, validation;
};

Split SplitFor(const DatasetManifest& m, int holdout) {
  if (holdout <= 0) return {m, m};
  auto [train, held] = SplitHoldout(m, holdout);
  if (held.entries.size() == held.missing.size()) return {m, m};
  return {train, held};
}

std::unique_ptr<SingleCodec> LoadModel(const std::string& path) {
  return RestoreModel(ReadCheckpoint(path));
}

nn::Matrix MelOfWav(const fs::path& path, const MelConfig& cfg) {
  AudioClip clip = ReadWav(path);
  if (clip.sample_rate != cfg.sample_rate) clip = Resample(clip, cfg.sample_rate);
  return ComputeMel(clip, cfg).values;
}

void WithOutput(const std::string& path, std::ostream& out,
                const std::function<void(std::ostream&)>& write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path);
  write(file);
}

int64_t CountParameters(const nn::Module& m) {
  int64_t n = 0;
  for (const auto& [name, p] : m.NamedParameters()) n += p.value().size();
  return n;
}

std::string ClassifyLog(const std::vector<LossRecord>& log, int window) {
  if (log.size() < static_cast<size_t>(3 * window)) return "n/a";
  return ConvergenceName(ClassifyConvergence(CommitmentCurve::FromLog(log, window)));
}

std::string SingleLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::vector<MetricReport> EvaluateManifest(const SingleCodec& model,
                                           const DatasetManifest& manifest,
                                           std::ostream* warnings) {
  const ModelConfig& cfg = model.config();
  const int k = cfg.quantizer.codebook_size;
  const double bps = Bandwidth(cfg.mel.sample_rate, cfg.mel.hop_length, cfg.downsample_factor, k);
  std::vector<MetricReport> reports;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (std::find(manifest.missing.begin(), manifest.missing.end(), i) != manifest.missing.end()) {
      if (warnings) *warnings << "warning: skipping " << e.utterance_id << ": audio missing\n";
      continue;
    }
    const nn::Matrix mel = LoadMel(e, cfg.mel).values;
    const TokenStream stream = UnpackTokens(PackTokens(EncodeUtterance(model, mel)));
    const nn::Matrix rec = DecodeTokens(model, stream);
    MetricReport r;
    r.utterance_id = e.utterance_id;
    r.bandwidth_bps = bps;
    r.mcd = Mcd(mel, rec);
    r.mel_l1 = MelL1(mel, rec);
    try {
      r.speaker_cosine = SpeakerCosineProxy(mel, rec);
    } catch (const InsufficientData& err) {
      if (warnings) *warnings << "warning: skipping " << e.utterance_id << ": " << err.what() << "\n";
      continue;
    }
    const std::vector<int> codes(stream.codes.begin(), stream.codes.end());
    r.perplexity = Perplexity(codes, k);
    r.utilization = Utilization(codes, k);
    reports.push_back(r);
  }
  if (reports.empty()) throw InsufficientData("no utterance could be evaluated");
  return reports;
}

std::string AblationHeader() {
  return "variant\tbandwidth_bps\tstoi\tpesq\tutmos\tmcd\tspk_proxy\tmel_l1\tperplexity\t"
         "utilization\tparameters\tconvergence";
}

std::string FormatAblationRow(const AblationRow& row) {
  MetricReport m = row.metrics;
  m.utterance_id = row.variant;
  return fmt::format("{}\t{}\t{}", FormatMetricReport(m), row.parameters, row.convergence);
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-codebook speech codec over mel spectrograms", "singlecodec"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // corpus
  std::string corpus_out;
  SynthCorpusOptions corpus_opts;
  auto* corpus = app.add_subcommand("corpus", "Synthesise a single-speaker corpus with manifest");
  corpus->add_option("--out", corpus_out, "Output directory")->required();
  corpus->add_option("--seconds", corpus_opts.total_seconds, "Total duration");
  corpus->add_option("--seed", corpus_opts.seed, "Synthesis seed");

  // train
  ModelArgs train_args;
  std::string variant = "Single-Codec", manifest_path, out_path, log_path, resume;
  int64_t steps = 5000;
  int progress_every = 100;
  auto* train = app.add_subcommand("train", "Train a codec variant");
  train->add_option("--variant", variant, "Variant name");
  train->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  train->add_option("--steps", steps, "Training steps")->check(CLI::NonNegativeNumber);
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--log", log_path, "Loss log path (default <out>.loss.tsv)");
  train->add_option("--resume", resume, "Continue from a training checkpoint");
  train->add_option("--progress-every", progress_every, "Print every N steps (0: never)");
  train_args.Add(train);

  // encode
  std::string ckpt, wav, tokens_path;
  auto* encode = app.add_subcommand("encode", "Encode a waveform into a token stream");
  encode->add_option("--ckpt", ckpt, "Checkpoint")->required();
  encode->add_option("--wav", wav, "Input WAV")->required();
  encode->add_option("--out", tokens_path, "Output token stream")->required();

  // decode
  std::string mel_out, gl_wav;
  int gl_iterations = kGriffinLimIterations;
  auto* decode = app.add_subcommand("decode", "Decode a token stream to a mel spectrogram");
  decode->add_option("--ckpt", ckpt, "Checkpoint")->required();
  decode->add_option("--tokens", tokens_path, "Token stream")->required();
  decode->add_option("--out-mel", mel_out, "Output .npy log-mel")->required();
  decode->add_option("--griffin-lim-wav", gl_wav, "Also write a Griffin-Lim waveform");
  decode->add_option("--iterations", gl_iterations, "Griffin-Lim iterations")
      ->check(CLI::PositiveNumber);

  // eval
  std::string report_path = "-";
  auto* eval = app.add_subcommand("eval", "Score reconstructions over a manifest");
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  eval->add_option("--report", report_path, "TSV report path ('-' for stdout)");

  // ablate
  ModelArgs ablate_args;
  std::vector<std::string> variants;
  int64_t ablate_steps = 0;
  int window = 25;
  std::string ckpt_dir;
  auto* ablate = app.add_subcommand("ablate", "Build, train and score the variant matrix");
  ablate->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  ablate->add_option("--variants", variants, "Variants (default: all eight)")->delimiter(',');
  ablate->add_option("--report", report_path, "TSV report path ('-' for stdout)");
  ablate->add_option("--steps", ablate_steps, "Training steps per variant")
      ->check(CLI::NonNegativeNumber);
  ablate->add_option("--window", window, "Commitment smoothing window")->check(CLI::PositiveNumber);
  ablate->add_option("--out-dir", ckpt_dir, "Keep per-variant checkpoints and loss logs here");
  ablate_args.Add(ablate);

  // curves
  std::string curve_log;
  bool classify = false;
  auto* curves = app.add_subcommand("curves", "Inspect a commitment-loss log");
  curves->add_option("--log", curve_log, "Loss log")->required();
  curves->add_flag("--classify", classify, "Print diverging, flat or converging");
  curves->add_option("--window", window, "Smoothing window")->check(CLI::PositiveNumber);

  std::vector<const char*> argv = {"singlecodec"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error UsageError: " << SingleLine(e.what()) << "\n";
    return 2;
  }

  try {
    if (corpus->parsed()) {
      DatasetManifest m = SynthesizeCorpus(corpus_out, corpus_opts);
      out << fmt::format("wrote {} utterances to {}\n", m.entries.size(), corpus_out);
    } else if (train->parsed()) {
      const DatasetManifest manifest = LoadManifest(manifest_path);
      const Split split = SplitFor(manifest, train_args.holdout);
      std::unique_ptr<Trainer> trainer;
      if (!resume.empty()) {
        trainer = Trainer::Load(resume);
      } else {
        trainer = std::make_unique<Trainer>(BuildVariant(variant, train_args.Base()),
                                            train_args.Options());
      }
      const ModelConfig& cfg = trainer->model().config();
      auto cache = std::make_shared<MelCache>(cfg.mel);
      const auto val = FixedPairs(split.validation, *cache, kValidationSeed,
                                  cfg.flags.ref_segment_len, cfg.seg2_frames);
      const ValidationResult before = EvaluateValidation(trainer->model(), val);
      trainer->Train(split.train, steps, cache, [&](const LossRecord& r) {
        if (progress_every > 0 && (r.step + 1) % progress_every == 0) {
          out << fmt::format("step {} rec {:.4f} commit {:.5f} adv {:.4f} perplexity {:.1f}\n",
                             r.step + 1, r.rec, r.commitment, r.adv, r.perplexity)
              << std::flush;
        }
      });
      const ValidationResult after = EvaluateValidation(trainer->model(), val);
      trainer->Save(out_path);
      WriteLossLog(log_path.empty() ? out_path + ".loss.tsv" : log_path, trainer->state().log);
      out << fmt::format("validation mel_l1 {:.4f} -> {:.4f}, perplexity {:.1f}, utilization "
                         "{:.4f}\n",
                         before.mel_l1, after.mel_l1, after.perplexity, after.utilization);
    } else if (encode->parsed()) {
      auto model = LoadModel(ckpt);
      const TokenStream s = EncodeUtterance(*model, MelOfWav(wav, model->config().mel));
      WriteTokenFile(tokens_path, s);
      out << fmt::format("{} tokens, {} pad frames\n", s.codes.size(), s.pad_frames);
    } else if (decode->parsed()) {
      auto model = LoadModel(ckpt);
      const nn::Matrix mel = DecodeTokens(*model, ReadTokenFile(tokens_path));
      WriteNpy(mel_out, mel);
      if (!gl_wav.empty()) WriteWav(gl_wav, MelToAudio(mel, model->config().mel, gl_iterations));
      out << fmt::format("{} frames\n", mel.rows());
    } else if (eval->parsed()) {
      auto model = LoadModel(ckpt);
      const auto reports = EvaluateManifest(*model, LoadManifest(manifest_path), &err);
      WithOutput(report_path, out, [&](std::ostream& o) { WriteMetricReports(o, reports); });
    } else if (ablate->parsed()) {
      if (variants.empty()) variants = VariantNames();
      const DatasetManifest manifest = LoadManifest(manifest_path);
      const Split split = SplitFor(manifest, ablate_args.holdout);
      if (!ckpt_dir.empty()) fs::create_directories(ckpt_dir);
      std::vector<AblationRow> rows;
      for (const std::string& name : variants) {
        Trainer trainer(BuildVariant(name, ablate_args.Base()), ablate_args.Options());
        auto cache = std::make_shared<MelCache>(trainer.model().config().mel);
        if (ablate_steps > 0) trainer.Train(split.train, ablate_steps, cache);
        AblationRow row;
        row.variant = name;
        row.parameters = CountParameters(trainer.model());
        row.metrics = AggregateReports(EvaluateManifest(trainer.model(), split.validation, &err));
        row.convergence = ClassifyLog(trainer.state().log, window);
        if (!ckpt_dir.empty()) {
          trainer.Save(fs::path(ckpt_dir) / (name + ".ckpt"));
          WriteLossLog(fs::path(ckpt_dir) / (name + ".loss.tsv"), trainer.state().log);
        }
        rows.push_back(row);
      }
      WithOutput(report_path, out, [&](std::ostream& o) {
        o << AblationHeader() << '\n';
        for (const AblationRow& r : rows) o << FormatAblationRow(r) << '\n';
      });
    } else if (curves->parsed()) {
      const std::vector<LossRecord> log = ReadLossLog(curve_log);
      const CommitmentCurve curve = CommitmentCurve::FromLog(log, window);
      if (classify) {
        out << ConvergenceName(ClassifyConvergence(curve)) << "\n";
      } else {
        if (log.empty()) throw InsufficientData(curve_log + " holds no records");
        out << fmt::format("{} records, steps {}..{}, commitment {} -> {}\n", log.size(),
                           log.front().step, log.back().step, log.front().commitment,
                           log.back().commitment);
      }
    }
  } catch (const Error& e) {
    err << "error " << ErrorCodeName(e.code()) << ": " << SingleLine(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error Internal: " << SingleLine(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace singlecodec
