// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_TRAIN_DISCRIMINATOR_H_
#define SINGLECODEC_TRAIN_DISCRIMINATOR_H_

#include <memory>
#include <vector>

#include <json.hpp>

#include "singlecodec/nn/layers.h"

namespace singlecodec {

// Four kernel-5 Conv2d layers then two kernel-3 layers over the
// [frames x mels] plane; the last layer emits one logit channel per patch.
struct DiscriminatorConfig {
  std::vector<int> channels = {32, 64, 128, 128, 128, 1};
  std::vector<int> strides = {2, 2, 2, 1, 1, 1};
  float leaky_slope = 0.2f;

  static constexpr int kLayers = 6;
  static int KernelOf(int layer) { return layer < 4 ? 5 : 3; }
  void Validate() const;
  // Patch grid for an input of `frames` x `mels`.
  std::pair<int, int> OutputSize(int frames, int mels) const;
  static DiscriminatorConfig Desk();
};

void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

class Discriminator : public nn::Module {
 public:
  Discriminator(const DiscriminatorConfig& config, int n_mels, int frames,
                nn::Rng& rng);
  // mel: [batch * frames x n_mels] -> logits [batch * out_h * out_w x 1].
  nn::Tensor Forward(const nn::Tensor& mel, int batch) const;
  std::pair<int, int> output_size() const { return out_size_; }
  const DiscriminatorConfig& config() const { return config_; }

 private:
  DiscriminatorConfig config_;
  int n_mels_, frames_;
  std::pair<int, int> out_size_;
  std::vector<std::unique_ptr<nn::Conv2dLayer>> convs_;
};

// mean(relu(1 - real)) + mean(relu(1 + fake)).
nn::Tensor DiscriminatorHingeLoss(const nn::Tensor& real_logits,
                                  const nn::Tensor& fake_logits);
// -mean(fake).
nn::Tensor GeneratorHingeLoss(const nn::Tensor& fake_logits);

}  // namespace singlecodec

#endif  // SINGLECODEC_TRAIN_DISCRIMINATOR_H_
