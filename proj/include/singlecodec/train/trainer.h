// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_TRAIN_TRAINER_H_
#define SINGLECODEC_TRAIN_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "singlecodec/data/manifest.h"
#include "singlecodec/model/checkpoint.h"
#include "singlecodec/model/codec.h"
#include "singlecodec/nn/adam.h"
#include "singlecodec/train/discriminator.h"
#include "singlecodec/train/loss_log.h"

namespace singlecodec {

struct LossWeights {
  float rec = 1.0f;
  float commitment = 0.25f;
  float adv = 0.1f;
  int64_t disc_start_step = 10000;

  void Validate() const;
};

struct TrainOptions {
  LossWeights weights;
  nn::AdamOptions adam;
  DiscriminatorConfig discriminator;
  int batch_size = 16;
  uint64_t seed = 0;

  // Batch 16 and the adversarial term from step 500.
  static TrainOptions Desk();
};

void to_json(nlohmann::json& j, const TrainOptions& o);
void from_json(const nlohmann::json& j, TrainOptions& o);

struct GeneratorLosses {
  nn::Tensor rec;
  nn::Tensor commitment;
  nn::Tensor adv;  // undefined while the adversarial term is gated off
  nn::Tensor total;
};

// total = w.rec * L1(mel_hat, seg2) + w.commitment * commitment
//         + w.adv * hinge_G(D(mel_hat))  [only if step >= disc_start_step]
GeneratorLosses ComputeGeneratorLosses(const nn::Tensor& mel_hat,
                                       const nn::Tensor& seg2,
                                       const nn::Tensor& commitment,
                                       const Discriminator* discriminator,
                                       int batch, int64_t step,
                                       const LossWeights& weights);

struct TrainState {
  int64_t step = 0;
  uint64_t seed = 0;
  std::vector<LossRecord> log;
};

class Trainer {
 public:
  Trainer(const ModelConfig& config, const TrainOptions& options);

  // One generator update, one EMA codebook update and, once active, one
  // discriminator update. Throws NumericalError naming the batch id on a
  // non-finite loss.
  LossRecord Step(const SegmentBatch& batch);
  LossRecord Step(const nn::Matrix& seg1, const nn::Matrix& seg2, int batch,
                  int64_t batch_id);

  // Runs `steps` steps over repeated seeded passes of the manifest.
  // `on_step` is called after each step.
  void Train(const DatasetManifest& manifest, int64_t steps,
             std::shared_ptr<MelCache> cache,
             const std::function<void(const LossRecord&)>& on_step = {});

  BatchOptions batch_options() const;

  void Save(const std::filesystem::path& path) const;
  // Restores a trainer saved by Save(), including optimiser moments, the
  // codebook, RNG state and the loss log.
  static std::unique_ptr<Trainer> Load(const std::filesystem::path& path);

  SingleCodec& model() { return *model_; }
  Discriminator& discriminator() { return *discriminator_; }
  const TrainState& state() const { return state_; }
  const TrainOptions& options() const { return options_; }

 private:
  ModelConfig config_;
  TrainOptions options_;
  std::unique_ptr<SingleCodec> model_;
  std::unique_ptr<Discriminator> discriminator_;
  std::unique_ptr<nn::Adam> gen_opt_, disc_opt_;
  TrainState state_;
  int64_t epoch_ = 0;
};

struct ValidationResult {
  double mel_l1 = 0.0;
  double perplexity = 0.0;  // over all codes of the set
  double utilization = 0.0;
};

// Inference-mode reconstruction of fixed segment pairs, in mini-batches.
ValidationResult EvaluateValidation(SingleCodec& model,
                                    const std::vector<SegmentPair>& pairs,
                                    int batch_size = 16);
double ValidationMelL1(SingleCodec& model, const std::vector<SegmentPair>& pairs,
                       int batch_size = 16);

// Every `every`-th utterance (indices every-1, 2*every-1, ...) is held out.
std::pair<DatasetManifest, DatasetManifest> SplitHoldout(const DatasetManifest& manifest,
                                                         int every = 10);
// One fixed pair per readable utterance, drawn with MixSeed(seed, index).
std::vector<SegmentPair> FixedPairs(const DatasetManifest& manifest, MelCache& cache,
                                    uint64_t seed, int seg1_frames, int seg2_frames);

}  // namespace singlecodec

#endif  // SINGLECODEC_TRAIN_TRAINER_H_
