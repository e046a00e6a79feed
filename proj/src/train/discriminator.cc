// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/train/discriminator.h"

#include <string>

#include "singlecodec/errors.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec {

using nlohmann::json;
using nn::Tensor;

namespace {

int ConvOut(int size, int kernel, int stride) {
  return (size + 2 * ((kernel - 1) / 2) - kernel) / stride + 1;
}

}  // namespace

void DiscriminatorConfig::Validate() const {
  if (static_cast<int>(channels.size()) != kLayers ||
      static_cast<int>(strides.size()) != kLayers) {
    throw ConfigError("discriminator: exactly 6 channel widths and strides required");
  }
  for (int i = 0; i < kLayers; ++i) {
    if (channels[i] < 1 || strides[i] < 1) {
      throw ConfigError("discriminator: channels and strides must be >= 1");
    }
  }
  if (channels.back() != 1) throw ConfigError("discriminator: last layer must emit 1 channel");
}

std::pair<int, int> DiscriminatorConfig::OutputSize(int frames, int mels) const {
  for (int i = 0; i < kLayers; ++i) {
    frames = ConvOut(frames, KernelOf(i), strides[i]);
    mels = ConvOut(mels, KernelOf(i), strides[i]);
  }
  return {frames, mels};
}

DiscriminatorConfig DiscriminatorConfig::Desk() {
  DiscriminatorConfig c;
  c.channels = {16, 32, 32, 32, 32, 1};
  return c;
}

void to_json(json& j, const DiscriminatorConfig& c) {
  j = json{{"channels", c.channels}, {"strides", c.strides}, {"leaky_slope", c.leaky_slope}};
}

void from_json(const json& j, DiscriminatorConfig& c) {
  if (j.contains("channels")) j.at("channels").get_to(c.channels);
  if (j.contains("strides")) j.at("strides").get_to(c.strides);
  if (j.contains("leaky_slope")) j.at("leaky_slope").get_to(c.leaky_slope);
}

Discriminator::Discriminator(const DiscriminatorConfig& config, int n_mels,
                             int frames, nn::Rng& rng)
    : config_(config), n_mels_(n_mels), frames_(frames) {
  config_.Validate();
  int in = 1;
  for (int i = 0; i < DiscriminatorConfig::kLayers; ++i) {
    convs_.push_back(std::make_unique<nn::Conv2dLayer>(
        in, config_.channels[i], DiscriminatorConfig::KernelOf(i),
        config_.strides[i], rng));
    RegisterModule("conv" + std::to_string(i), convs_.back().get());
    in = config_.channels[i];
  }
  out_size_ = config_.OutputSize(frames, n_mels);
}

Tensor Discriminator::Forward(const Tensor& mel, int batch) const {
  if (batch < 1 || mel.cols() != n_mels_ || mel.rows() != batch * frames_) {
    throw ShapeError("discriminate: expected [" + std::to_string(batch) + " * " +
                     std::to_string(frames_) + " x " + std::to_string(n_mels_) +
                     "], got [" + std::to_string(mel.rows()) + " x " +
                     std::to_string(mel.cols()) + "]");
  }
  Tensor h = nn::Reshape(mel, static_cast<int>(mel.rows()) * n_mels_, 1);
  int height = frames_, width = n_mels_;
  for (size_t i = 0; i < convs_.size(); ++i) {
    int oh, ow;
    h = convs_[i]->Forward(h, batch, height, width, &oh, &ow);
    if (i + 1 < convs_.size()) h = nn::LeakyRelu(h, config_.leaky_slope);
    height = oh;
    width = ow;
  }
  return h;
}

Tensor DiscriminatorHingeLoss(const Tensor& real_logits, const Tensor& fake_logits) {
  Tensor real = nn::Mean(nn::Relu(nn::AddScalar(nn::Scale(real_logits, -1.0f), 1.0f)));
  Tensor fake = nn::Mean(nn::Relu(nn::AddScalar(fake_logits, 1.0f)));
  return nn::Add(real, fake);
}

Tensor GeneratorHingeLoss(const Tensor& fake_logits) {
  return nn::Scale(nn::Mean(fake_logits), -1.0f);
}

}  // namespace singlecodec
