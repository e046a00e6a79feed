// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/train/trainer.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "singlecodec/errors.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec {

using nlohmann::json;
using nn::Matrix;
using nn::Tensor;

void LossWeights::Validate() const {
  if (!(rec >= 0.0f) || !(commitment >= 0.0f) || !(adv >= 0.0f)) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (disc_start_step < 0) throw ConfigError("disc_start_step must be >= 0");
}

TrainOptions TrainOptions::Desk() {
  TrainOptions o;
  o.weights.disc_start_step = 500;
  o.discriminator = DiscriminatorConfig::Desk();
  return o;
}

void to_json(json& j, const TrainOptions& o) {
  j = json{{"rec_weight", o.weights.rec},
           {"commitment_weight", o.weights.commitment},
           {"adv_weight", o.weights.adv},
           {"disc_start_step", o.weights.disc_start_step},
           {"lr", o.adam.lr},
           {"beta1", o.adam.beta1},
           {"beta2", o.adam.beta2},
           {"eps", o.adam.eps},
           {"discriminator", o.discriminator},
           {"batch_size", o.batch_size},
           {"seed", o.seed}};
}

void from_json(const json& j, TrainOptions& o) {
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("rec_weight", o.weights.rec);
  opt("commitment_weight", o.weights.commitment);
  opt("adv_weight", o.weights.adv);
  opt("disc_start_step", o.weights.disc_start_step);
  opt("lr", o.adam.lr);
  opt("beta1", o.adam.beta1);
  opt("beta2", o.adam.beta2);
  opt("eps", o.adam.eps);
  opt("discriminator", o.discriminator);
  opt("batch_size", o.batch_size);
  opt("seed", o.seed);
}

GeneratorLosses ComputeGeneratorLosses(const Tensor& mel_hat, const Tensor& seg2,
                                       const Tensor& commitment,
                                       const Discriminator* discriminator,
                                       int batch, int64_t step,
                                       const LossWeights& weights) {
  GeneratorLosses out;
  out.rec = nn::MeanAbsError(mel_hat, seg2);
  out.commitment = commitment;
  out.total = nn::Add(nn::Scale(out.rec, weights.rec),
                      nn::Scale(commitment, weights.commitment));
  if (discriminator != nullptr && step >= weights.disc_start_step) {
    out.adv = GeneratorHingeLoss(discriminator->Forward(mel_hat, batch));
    out.total = nn::Add(out.total, nn::Scale(out.adv, weights.adv));
  }
  return out;
}

Trainer::Trainer(const ModelConfig& config, const TrainOptions& options)
    : config_(config), options_(options) {
  config_.Validate();
  options_.weights.Validate();
  options_.discriminator.Validate();
  if (options_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  state_.seed = options_.seed;
  model_ = std::make_unique<SingleCodec>(config_, options_.seed);
  nn::Rng disc_rng(MixSeed(options_.seed, 0xd15c));
  discriminator_ = std::make_unique<Discriminator>(
      options_.discriminator, config_.n_mels(), config_.seg2_frames, disc_rng);
  gen_opt_ = std::make_unique<nn::Adam>(model_->Parameters(), options_.adam);
  disc_opt_ = std::make_unique<nn::Adam>(discriminator_->Parameters(), options_.adam);
}

BatchOptions Trainer::batch_options() const {
  BatchOptions b;
  b.batch_size = options_.batch_size;
  b.seg1_frames = config_.flags.ref_segment_len;
  b.seg2_frames = config_.seg2_frames;
  return b;
}

LossRecord Trainer::Step(const SegmentBatch& batch) {
  return Step(batch.StackSeg1(), batch.StackSeg2(), batch.size(), batch.batch_id);
}

LossRecord Trainer::Step(const Matrix& seg1, const Matrix& seg2, int batch,
                         int64_t batch_id) {
  const int64_t step = state_.step;
  const bool adversarial = step >= options_.weights.disc_start_step;
  Tensor seg1_t(seg1), seg2_t(seg2);

  gen_opt_->ZeroGrad();
  ForwardOutput fwd;
  GeneratorLosses losses;
  try {
    fwd = model_->Forward(seg1_t, seg2_t, batch, true);
    losses = ComputeGeneratorLosses(fwd.mel_hat, seg2_t, fwd.commitment,
                                    discriminator_.get(), batch, step, options_.weights);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (step " + std::to_string(step) +
                         ", batch " + std::to_string(batch_id) + ")");
  }
  const double total = losses.total.value()(0, 0);
  if (!std::isfinite(total)) {
    throw NumericalError("non-finite loss at step " + std::to_string(step) +
                         ", batch " + std::to_string(batch_id));
  }
  losses.total.Backward();
  gen_opt_->Step();
  // The generator's adversarial term also deposits gradients in D.
  disc_opt_->ZeroGrad();

  model_->quantizer().EmaUpdate(fwd.latent.value(), fwd.quantization.codes, step);

  if (adversarial) {
    Tensor real = discriminator_->Forward(seg2_t, batch);
    Tensor fake = discriminator_->Forward(fwd.mel_hat.Detach(), batch);
    Tensor d_loss = DiscriminatorHingeLoss(real, fake);
    if (!std::isfinite(d_loss.value()(0, 0))) {
      throw NumericalError("non-finite discriminator loss at step " +
                           std::to_string(step) + ", batch " + std::to_string(batch_id));
    }
    d_loss.Backward();
    disc_opt_->Step();
    disc_opt_->ZeroGrad();
  }

  LossRecord rec;
  rec.step = step;
  rec.commitment = losses.commitment.value()(0, 0);
  rec.rec = losses.rec.value()(0, 0);
  rec.adv = adversarial ? static_cast<double>(losses.adv.value()(0, 0)) : 0.0;
  rec.perplexity = fwd.quantization.perplexity;
  state_.log.push_back(rec);
  ++state_.step;
  return rec;
}

void Trainer::Train(const DatasetManifest& manifest, int64_t steps,
                    std::shared_ptr<MelCache> cache,
                    const std::function<void(const LossRecord&)>& on_step) {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!cache) cache = std::make_shared<MelCache>(config_.mel);
  int64_t done = 0;
  while (done < steps) {
    BatchIterator it(manifest, batch_options(), MixSeed(options_.seed, epoch_), cache);
    bool any = false;
    while (done < steps) {
      std::optional<SegmentBatch> b = it.Next();
      if (!b) break;
      any = true;
      LossRecord r = Step(*b);
      ++done;
      if (on_step) on_step(r);
    }
    if (!any) throw InsufficientData("manifest yields no usable batches");
    if (done < steps) ++epoch_;
  }
}

namespace {

void StoreMoments(nn::Adam& opt, const std::string& prefix, CheckpointData& data) {
  for (size_t i = 0; i < opt.first_moments().size(); ++i) {
    data.arrays[prefix + ".m." + std::to_string(i)] = opt.first_moments()[i];
    data.arrays[prefix + ".v." + std::to_string(i)] = opt.second_moments()[i];
  }
  data.meta[prefix + ".step"] = opt.step_count();
}

void RestoreMoments(const CheckpointData& data, const std::string& prefix, nn::Adam& opt) {
  for (size_t i = 0; i < opt.first_moments().size(); ++i) {
    auto m = data.arrays.find(prefix + ".m." + std::to_string(i));
    auto v = data.arrays.find(prefix + ".v." + std::to_string(i));
    if (m == data.arrays.end() || v == data.arrays.end()) {
      throw FormatError("checkpoint is missing optimiser state " + prefix);
    }
    opt.first_moments()[i] = m->second;
    opt.second_moments()[i] = v->second;
  }
  opt.set_step_count(data.meta.value(prefix + ".step", int64_t{0}));
}

}  // namespace

void Trainer::Save(const std::filesystem::path& path) const {
  CheckpointData data;
  StoreModel(*model_, data);
  for (const auto& [name, p] : discriminator_->NamedParameters()) {
    data.arrays["disc." + name] = p.value();
  }
  StoreMoments(*gen_opt_, "adam.gen", data);
  StoreMoments(*disc_opt_, "adam.disc", data);
  std::ostringstream rng;
  rng << model_->quantizer().rng();
  data.meta["train"] = {{"options", options_},
                        {"step", state_.step},
                        {"seed", state_.seed},
                        {"epoch", epoch_},
                        {"quantizer_rng", rng.str()},
                        {"log", state_.log}};
  WriteCheckpoint(path, data);
}

std::unique_ptr<Trainer> Trainer::Load(const std::filesystem::path& path) {
  CheckpointData data = ReadCheckpoint(path);
  if (!data.meta.contains("train")) {
    throw FormatError(path.string() + " is a model checkpoint without training state");
  }
  const json& t = data.meta.at("train");
  std::unique_ptr<SingleCodec> model = RestoreModel(data);
  auto trainer = std::make_unique<Trainer>(model->config(),
                                           t.at("options").get<TrainOptions>());
  trainer->model_ = std::move(model);
  trainer->gen_opt_ =
      std::make_unique<nn::Adam>(trainer->model_->Parameters(), trainer->options_.adam);
  RestoreParameters(data, "disc.", *trainer->discriminator_);
  RestoreMoments(data, "adam.gen", *trainer->gen_opt_);
  RestoreMoments(data, "adam.disc", *trainer->disc_opt_);
  std::istringstream rng(t.at("quantizer_rng").get<std::string>());
  rng >> trainer->model_->quantizer().rng();
  trainer->state_.step = t.at("step").get<int64_t>();
  trainer->state_.seed = t.at("seed").get<uint64_t>();
  trainer->epoch_ = t.at("epoch").get<int64_t>();
  trainer->state_.log = t.at("log").get<std::vector<LossRecord>>();
  return trainer;
}

ValidationResult EvaluateValidation(SingleCodec& model,
                                    const std::vector<SegmentPair>& pairs,
                                    int batch_size) {
  if (pairs.empty()) throw InsufficientData("validation set is empty");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  nn::NoGradGuard no_grad;
  double sum = 0.0;
  std::vector<int> codes;
  for (size_t begin = 0; begin < pairs.size(); begin += batch_size) {
    SegmentBatch b;
    const size_t end = std::min(pairs.size(), begin + batch_size);
    b.pairs.assign(pairs.begin() + begin, pairs.begin() + end);
    Tensor seg2(b.StackSeg2());
    ForwardOutput out = model.Forward(Tensor(b.StackSeg1()), seg2, b.size(), false);
    sum += (out.mel_hat.value() - seg2.value()).cwiseAbs().cast<double>().sum();
    codes.insert(codes.end(), out.quantization.codes.begin(), out.quantization.codes.end());
  }
  const int k = model.config().quantizer.codebook_size;
  ValidationResult r;
  r.mel_l1 = sum / (static_cast<double>(pairs.size()) * model.config().seg2_frames *
                    model.config().n_mels());
  r.perplexity = Perplexity(codes, k);
  r.utilization = Utilization(codes, k);
  return r;
}

double ValidationMelL1(SingleCodec& model, const std::vector<SegmentPair>& pairs,
                       int batch_size) {
  return EvaluateValidation(model, pairs, batch_size).mel_l1;
}

std::pair<DatasetManifest, DatasetManifest> SplitHoldout(const DatasetManifest& manifest,
                                                         int every) {
  if (every < 2) throw ConfigError("holdout interval must be >= 2");
  DatasetManifest train, held;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const bool missing = std::find(manifest.missing.begin(), manifest.missing.end(), i) !=
                         manifest.missing.end();
    DatasetManifest& dst = (i % every == static_cast<size_t>(every - 1)) ? held : train;
    if (missing) dst.missing.push_back(dst.entries.size());
    dst.entries.push_back(manifest.entries[i]);
  }
  return {train, held};
}

std::vector<SegmentPair> FixedPairs(const DatasetManifest& manifest, MelCache& cache,
                                    uint64_t seed, int seg1_frames, int seg2_frames) {
  std::vector<SegmentPair> pairs;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    if (std::find(manifest.missing.begin(), manifest.missing.end(), i) !=
        manifest.missing.end()) {
      continue;
    }
    pairs.push_back(SampleSegments(cache.Get(manifest.entries[i]), MixSeed(seed, i),
                                   seg1_frames, seg2_frames));
  }
  return pairs;
}

}  // namespace singlecodec
