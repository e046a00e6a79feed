// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/model/blocks.h"

#include <cmath>
#include <string>

#include "singlecodec/errors.h"

namespace singlecodec {

using nn::Matrix;
using nn::Tensor;

namespace {

constexpr float kSlope = 0.2f;

void CheckDivisible(const Tensor& x, int batch, int factor, const char* what) {
  if (batch < 1 || x.rows() % batch != 0) {
    throw ShapeError(std::string(what) + ": rows not divisible by batch");
  }
  const auto time = x.rows() / batch;
  if (time % factor != 0) {
    throw ShapeError(std::string(what) + ": factor " + std::to_string(factor) +
                     " does not divide length " + std::to_string(time));
  }
}

// Strided conv that maps T frames to exactly T / factor frames.
std::unique_ptr<nn::Conv1dLayer> StridedConv(int in, int out, int factor,
                                             nn::Rng& rng) {
  if (factor == 1) return std::make_unique<nn::Conv1dLayer>(in, out, 1, rng, 1, 0);
  return std::make_unique<nn::Conv1dLayer>(in, out, 2 * factor, rng, factor,
                                           factor / 2);
}

std::unique_ptr<nn::ConvTranspose1dLayer> TransposedConv(int in, int out,
                                                         int factor,
                                                         nn::Rng& rng) {
  if (factor == 1) {
    return std::make_unique<nn::ConvTranspose1dLayer>(in, out, 1, 1, 0, rng);
  }
  return std::make_unique<nn::ConvTranspose1dLayer>(in, out, 2 * factor, factor,
                                                    factor / 2, rng);
}

void CheckFactor(int factor) {
  if (factor < 1 || (factor > 1 && factor % 2 != 0)) {
    throw ConfigError("sampling factor must be 1 or even, got " +
                      std::to_string(factor));
  }
}

}  // namespace

ResidualBlock::ResidualBlock(int channels, nn::Rng& rng) {
  for (int unit = 0; unit < 2; ++unit) {
    for (int kernel : {3, 1}) {
      convs_.push_back(std::make_unique<nn::Conv1dLayer>(channels, channels,
                                                         kernel, rng));
      RegisterModule(std::to_string(convs_.size() - 1), convs_.back().get());
    }
  }
}

Tensor ResidualBlock::Forward(const Tensor& x, int batch) const {
  Tensor h = x;
  for (size_t unit = 0; unit < 2; ++unit) {
    Tensor y = convs_[2 * unit]->Forward(nn::LeakyRelu(h, kSlope), batch);
    y = convs_[2 * unit + 1]->Forward(nn::LeakyRelu(y, kSlope), batch);
    h = nn::Add(h, y);
  }
  return h;
}

Downsample::Downsample(int in, int out, int factor, bool hybrid, nn::Rng& rng)
    : factor_(factor), hybrid_(hybrid) {
  CheckFactor(factor);
  if (hybrid) {
    conv_ = StridedConv(in, in, factor, rng);
    mix_ = std::make_unique<nn::LinearLayer>(in, out, rng);
    RegisterModule("conv", conv_.get());
    RegisterModule("mix", mix_.get());
  } else {
    conv_ = StridedConv(in, out, factor, rng);
    RegisterModule("conv", conv_.get());
  }
}

Tensor Downsample::ConvPath(const Tensor& x, int batch) const {
  CheckDivisible(x, batch, factor_, "downsample");
  return conv_->Forward(x, batch);
}

Tensor Downsample::PoolPath(const Tensor& x) const {
  return factor_ == 1 ? x : nn::AvgPoolTime(x, factor_);
}

Tensor Downsample::Forward(const Tensor& x, int batch) const {
  Tensor conv = ConvPath(x, batch);
  if (!hybrid_) return conv;
  return mix_->Forward(nn::Add(conv, PoolPath(x)));
}

Upsample::Upsample(int in, int out, int factor, bool hybrid, nn::Rng& rng)
    : factor_(factor), hybrid_(hybrid) {
  CheckFactor(factor);
  if (hybrid) {
    conv_ = TransposedConv(in, in, factor, rng);
    mix_ = std::make_unique<nn::LinearLayer>(in, out, rng);
    RegisterModule("conv", conv_.get());
    RegisterModule("mix", mix_.get());
  } else {
    conv_ = TransposedConv(in, out, factor, rng);
    RegisterModule("conv", conv_.get());
  }
}

Tensor Upsample::ConvPath(const Tensor& x, int batch) const {
  CheckDivisible(x, batch, 1, "upsample");
  return conv_->Forward(x, batch);
}

Tensor Upsample::RepeatPath(const Tensor& x) const {
  return factor_ == 1 ? x : nn::RepeatTime(x, factor_);
}

Tensor Upsample::Forward(const Tensor& x, int batch) const {
  Tensor conv = ConvPath(x, batch);
  if (!hybrid_) return conv;
  return mix_->Forward(nn::Add(conv, RepeatPath(x)));
}

ResampleBlock::ResampleBlock(int channels, int factor, bool hybrid, nn::Rng& rng)
    : factor_(factor),
      down_(channels, channels, factor, hybrid, rng),
      local_(channels, rng),
      up_(channels, channels, factor, hybrid, rng) {
  RegisterModule("down", &down_);
  RegisterModule("local", &local_);
  RegisterModule("up", &up_);
}

Tensor ResampleBlock::Inner(const Tensor& x, int batch) const {
  CheckDivisible(x, batch, factor_, "resample_block");
  return up_.Forward(local_.Forward(down_.Forward(x, batch), batch), batch);
}

Tensor ResampleBlock::Forward(const Tensor& x, int batch) const {
  return nn::Add(x, Inner(x, batch));
}

void ResampleBlock::ZeroInitInner() {
  for (Tensor p : Parameters()) p.mutable_value().setZero();
}

ConformerLayer::ConformerLayer(int dim, int heads, int kernel, int ffn_mult,
                               nn::Rng& rng)
    : heads_(heads),
      ffn1_norm_(dim),
      attn_norm_(dim),
      conv_norm_(dim),
      ffn2_norm_(dim),
      out_norm_(dim),
      ffn1_in_(dim, dim * ffn_mult, rng),
      ffn1_out_(dim * ffn_mult, dim, rng),
      q_(dim, dim, rng),
      k_(dim, dim, rng),
      v_(dim, dim, rng),
      attn_out_(dim, dim, rng),
      pointwise_in_(dim, 2 * dim, rng),
      depthwise_(dim, kernel, rng),
      depthwise_norm_(dim),
      pointwise_out_(dim, dim, rng),
      ffn2_in_(dim, dim * ffn_mult, rng),
      ffn2_out_(dim * ffn_mult, dim, rng) {
  RegisterModule("ffn1_norm", &ffn1_norm_);
  RegisterModule("ffn1_in", &ffn1_in_);
  RegisterModule("ffn1_out", &ffn1_out_);
  RegisterModule("attn_norm", &attn_norm_);
  RegisterModule("q", &q_);
  RegisterModule("k", &k_);
  RegisterModule("v", &v_);
  RegisterModule("attn_out", &attn_out_);
  RegisterModule("conv_norm", &conv_norm_);
  RegisterModule("pointwise_in", &pointwise_in_);
  RegisterModule("depthwise", &depthwise_);
  RegisterModule("depthwise_norm", &depthwise_norm_);
  RegisterModule("pointwise_out", &pointwise_out_);
  RegisterModule("ffn2_norm", &ffn2_norm_);
  RegisterModule("ffn2_in", &ffn2_in_);
  RegisterModule("ffn2_out", &ffn2_out_);
  RegisterModule("out_norm", &out_norm_);
}

Tensor ConformerLayer::FeedForward(const Tensor& x, int which) const {
  const auto& norm = which == 1 ? ffn1_norm_ : ffn2_norm_;
  const auto& in = which == 1 ? ffn1_in_ : ffn2_in_;
  const auto& out = which == 1 ? ffn1_out_ : ffn2_out_;
  return out.Forward(nn::Silu(in.Forward(norm.Forward(x))));
}

Tensor ConformerLayer::Forward(const Tensor& x, int batch) const {
  Tensor h = nn::Add(x, nn::Scale(FeedForward(x, 1), 0.5f));
  Tensor a = attn_norm_.Forward(h);
  a = nn::MultiHeadAttention(q_.Forward(a), k_.Forward(a), v_.Forward(a), batch,
                             heads_);
  h = nn::Add(h, attn_out_.Forward(a));
  Tensor c = nn::Glu(pointwise_in_.Forward(conv_norm_.Forward(h)));
  c = nn::Silu(depthwise_norm_.Forward(depthwise_.Forward(c, batch)));
  h = nn::Add(h, pointwise_out_.Forward(c));
  h = nn::Add(h, nn::Scale(FeedForward(h, 2), 0.5f));
  return out_norm_.Forward(h);
}

Matrix SinusoidalPositions(int time, int dim) {
  Matrix pe(time, dim);
  for (int t = 0; t < time; ++t) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / dim);
      pe(t, i) = static_cast<float>(i % 2 == 0 ? std::sin(t * freq) : std::cos(t * freq));
    }
  }
  return pe;
}

ReferenceEncoder::ReferenceEncoder(int n_mels, const std::vector<int>& channels,
                                   int kernel, int gru_hidden, int out_dim,
                                   nn::Rng& rng)
    : n_mels_(n_mels) {
  int in = 1, width = n_mels;
  for (size_t i = 0; i < channels.size(); ++i) {
    convs_.push_back(std::make_unique<nn::Conv2dLayer>(in, channels[i], kernel, 2, rng));
    RegisterModule("conv" + std::to_string(i), convs_.back().get());
    in = channels[i];
    width = (width + 2 * ((kernel - 1) / 2) - kernel) / 2 + 1;
  }
  gru_in_ = width * in;
  gru_ = std::make_unique<nn::Gru>(gru_in_, gru_hidden, rng);
  proj_ = std::make_unique<nn::LinearLayer>(gru_hidden, out_dim, rng);
  RegisterModule("gru", gru_.get());
  RegisterModule("proj", proj_.get());
}

Tensor ReferenceEncoder::Forward(const Tensor& mel, int batch) const {
  if (mel.cols() != n_mels_ || batch < 1 || mel.rows() % batch != 0 ||
      mel.rows() == 0) {
    throw ShapeError("reference encoder: expected [batch * frames x " +
                     std::to_string(n_mels_) + "] input");
  }
  int height = static_cast<int>(mel.rows() / batch), width = n_mels_;
  Tensor h = nn::Reshape(mel, static_cast<int>(mel.rows()) * n_mels_, 1);
  for (const auto& conv : convs_) {
    int oh, ow;
    h = nn::Relu(conv->Forward(h, batch, height, width, &oh, &ow));
    height = oh;
    width = ow;
  }
  // NHWC rows (b, h, w) regroup as (b, h) x (w, c): a sequence over h.
  h = nn::Reshape(h, batch * height, gru_in_);
  return proj_->Forward(gru_->Forward(h, batch));
}

}  // namespace singlecodec
