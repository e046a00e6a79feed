// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/model/codec.h"

#include <string>

#include "singlecodec/errors.h"

namespace singlecodec {

using nn::Matrix;
using nn::Tensor;

namespace {

int Stages(const ModelConfig& c) { return static_cast<int>(c.conv_hidden_dims.size()) - 1; }

void CheckSequence(const Tensor& x, int batch, int cols, const char* what) {
  if (!x.defined() || batch < 1 || x.rows() == 0 || x.rows() % batch != 0 ||
      x.cols() != cols) {
    throw ShapeError(std::string(what) + ": expected [batch * time x " +
                     std::to_string(cols) + "], got [" +
                     (x.defined() ? std::to_string(x.rows()) + " x " +
                                        std::to_string(x.cols())
                                  : std::string("undefined")) +
                     "]");
  }
}

}  // namespace

Encoder::Encoder(const ModelConfig& config, nn::Rng& rng) : config_(config) {
  const auto& dims = config.conv_hidden_dims;
  const bool hybrid = config.flags.use_hybrid_sampling;
  const bool per_block = config.flags.use_reference && config.flags.subtract_g_per_block;
  conv_in_ = std::make_unique<nn::Conv1dLayer>(config.n_mels(), dims[0], 3, rng);
  RegisterModule("conv_in", conv_in_.get());
  for (int s = 0; s <= Stages(config); ++s) {
    blocks_.push_back(std::make_unique<ResidualBlock>(dims[s], rng));
    RegisterModule("block" + std::to_string(s), blocks_.back().get());
    if (per_block) {
      block_g_proj_.push_back(std::make_unique<nn::LinearLayer>(config.model_dim, dims[s], rng));
      RegisterModule("block_g_proj" + std::to_string(s), block_g_proj_.back().get());
    }
    if (s < Stages(config)) {
      downs_.push_back(std::make_unique<Downsample>(dims[s], dims[s + 1], 2, hybrid, rng));
      RegisterModule("down" + std::to_string(s), downs_.back().get());
    }
  }
  const int top = dims.back();
  if (config.flags.use_resampling) {
    resample_ = std::make_unique<ResampleBlock>(top, config.resample_factor, hybrid, rng);
    RegisterModule("resample", resample_.get());
  }
  int width = top;
  if (config.flags.use_conformer) {
    conformer_in_ = std::make_unique<nn::LinearLayer>(top, config.conformer_dim, rng);
    RegisterModule("conformer_in", conformer_in_.get());
    for (int l = 0; l < config.conformer_layers; ++l) {
      conformer_.push_back(std::make_unique<ConformerLayer>(
          config.conformer_dim, config.conformer_heads, config.conformer_kernel,
          config.conformer_ffn_mult, rng));
      RegisterModule("conformer" + std::to_string(l), conformer_.back().get());
    }
    width = config.conformer_dim;
  }
  to_model_ = std::make_unique<nn::LinearLayer>(width, config.model_dim, rng);
  RegisterModule("to_model", to_model_.get());
  if (config.flags.use_reference) {
    g_proj_ = std::make_unique<nn::LinearLayer>(config.model_dim, config.model_dim, rng);
    RegisterModule("g_proj", g_proj_.get());
  }
  int context = config.model_dim;
  if (config.flags.use_blstm) {
    blstm_ = std::make_unique<nn::BiLstm>(config.model_dim, config.blstm_hidden,
                                          config.blstm_layers, rng);
    RegisterModule("blstm", blstm_.get());
    context = blstm_->output_dim();
  }
  out_ = std::make_unique<nn::LinearLayer>(context, config.model_dim, rng);
  RegisterModule("out", out_.get());
}

Tensor Encoder::SubtractG(const Tensor& x, const Tensor& g, const nn::LinearLayer& proj,
                          int batch) const {
  return nn::Sub(x, nn::BroadcastOverTime(proj.Forward(g),
                                          static_cast<int>(x.rows() / batch)));
}

Encoder::Output Encoder::Forward(const Tensor& seg2, const Tensor& g,
                                 int batch) const {
  CheckSequence(seg2, batch, config_.n_mels(), "encode");
  const auto frames = seg2.rows() / batch;
  if (frames % config_.downsample_factor != 0) {
    throw ShapeError("encode: downsample_factor " +
                     std::to_string(config_.downsample_factor) +
                     " does not divide " + std::to_string(frames) + " frames");
  }
  const bool use_g = config_.flags.use_reference;
  if (use_g) CheckSequence(g, batch, config_.model_dim, "encode g");
  if (use_g && g.rows() != batch) throw ShapeError("encode: one g per batch item");

  Tensor h = conv_in_->Forward(seg2, batch);
  for (size_t s = 0; s < blocks_.size(); ++s) {
    h = blocks_[s]->Forward(h, batch);
    if (!block_g_proj_.empty()) h = SubtractG(h, g, *block_g_proj_[s], batch);
    if (s < downs_.size()) h = downs_[s]->Forward(h, batch);
  }
  if (resample_) h = resample_->Forward(h, batch);
  if (conformer_in_) {
    h = conformer_in_->Forward(h);
    const int time = static_cast<int>(h.rows() / batch);
    const Matrix pe = SinusoidalPositions(time, config_.conformer_dim);
    Matrix tiled(h.rows(), h.cols());
    for (int b = 0; b < batch; ++b) tiled.middleRows(b * time, time) = pe;
    h = nn::Add(h, Tensor(std::move(tiled)));
    for (const auto& layer : conformer_) h = layer->Forward(h, batch);
  }
  h = to_model_->Forward(h);
  if (use_g) h = SubtractG(h, g, *g_proj_, batch);
  Output out;
  out.pre_context = h;
  if (blstm_) h = blstm_->Forward(h, batch);
  out.latent = out_->Forward(h);
  return out;
}

Decoder::Decoder(const ModelConfig& config, nn::Rng& rng) : config_(config) {
  const auto& dims = config.conv_hidden_dims;
  const bool hybrid = config.flags.use_hybrid_sampling;
  if (config.flags.use_reference) {
    g_proj_ = std::make_unique<nn::LinearLayer>(config.model_dim, config.model_dim, rng);
    RegisterModule("g_proj", g_proj_.get());
  }
  int width = config.model_dim;
  if (config.flags.use_blstm) {
    blstm_ = std::make_unique<nn::BiLstm>(config.model_dim, config.blstm_hidden,
                                          config.blstm_layers, rng);
    RegisterModule("blstm", blstm_.get());
    width = blstm_->output_dim();
  }
  in_ = std::make_unique<nn::LinearLayer>(width, dims.back(), rng);
  RegisterModule("in", in_.get());
  if (config.flags.use_resampling) {
    resample_ = std::make_unique<ResampleBlock>(dims.back(), config.resample_factor,
                                                hybrid, rng);
    RegisterModule("resample", resample_.get());
  }
  for (int s = Stages(config); s >= 0; --s) {
    blocks_.push_back(std::make_unique<ResidualBlock>(dims[s], rng));
    RegisterModule("block" + std::to_string(s), blocks_.back().get());
    if (s > 0) {
      ups_.push_back(std::make_unique<Upsample>(dims[s], dims[s - 1], 2, hybrid, rng));
      RegisterModule("up" + std::to_string(s - 1), ups_.back().get());
    }
  }
  out_ = std::make_unique<nn::LinearLayer>(dims[0], config.n_mels(), rng);
  RegisterModule("out", out_.get());
}

Tensor Decoder::Forward(const Tensor& q, const Tensor& g, int batch) const {
  CheckSequence(q, batch, config_.model_dim, "decode");
  Tensor h = q;
  if (g_proj_) {
    CheckSequence(g, batch, config_.model_dim, "decode g");
    if (g.rows() != batch) throw ShapeError("decode: one g per batch item");
    h = nn::Add(h, nn::BroadcastOverTime(g_proj_->Forward(g),
                                         static_cast<int>(q.rows() / batch)));
  }
  if (blstm_) h = blstm_->Forward(h, batch);
  h = in_->Forward(h);
  if (resample_) h = resample_->Forward(h, batch);
  for (size_t s = 0; s < blocks_.size(); ++s) {
    h = blocks_[s]->Forward(h, batch);
    if (s < ups_.size()) h = ups_[s]->Forward(h, batch);
  }
  return out_->Forward(h);
}

SingleCodec::SingleCodec(const ModelConfig& config, uint64_t seed)
    : config_((config.Validate(), config)),
      rng_(seed),
      reference_(config.flags.use_reference
                     ? std::make_unique<ReferenceEncoder>(
                           config.n_mels(), config.ref_conv_channels,
                           config.ref_conv_kernel, config.ref_gru_hidden,
                           config.model_dim, rng_)
                     : nullptr),
      encoder_(config, rng_),
      decoder_(config, rng_),
      quantizer_(config.quantizer, rng_()) {
  if (reference_) RegisterModule("reference", reference_.get());
  RegisterModule("encoder", &encoder_);
  RegisterModule("decoder", &decoder_);
}

Tensor SingleCodec::ReferenceEmbedding(const Tensor& seg1, int batch,
                                       bool strict) const {
  if (!reference_) return Tensor();
  CheckSequence(seg1, batch, config_.n_mels(), "reference_encode");
  if (strict && seg1.rows() / batch != config_.flags.ref_segment_len) {
    throw ShapeError("reference_encode: expected " +
                     std::to_string(config_.flags.ref_segment_len) +
                     " frames, got " + std::to_string(seg1.rows() / batch));
  }
  return reference_->Forward(seg1, batch);
}

Encoder::Output SingleCodec::Encode(const Tensor& seg2, const Tensor& g,
                                    int batch) const {
  return encoder_.Forward(seg2, g, batch);
}

Tensor SingleCodec::Decode(const Tensor& q, const Tensor& g, int batch) const {
  return decoder_.Forward(q, g, batch);
}

Matrix SingleCodec::LookupCodes(const std::vector<int>& codes) const {
  const Matrix& vectors = quantizer_.codebook().vectors;
  Matrix q(static_cast<Eigen::Index>(codes.size()), vectors.cols());
  for (size_t t = 0; t < codes.size(); ++t) {
    if (codes[t] < 0 || codes[t] >= vectors.rows()) {
      throw InvalidInput("code " + std::to_string(codes[t]) + " outside codebook");
    }
    q.row(static_cast<Eigen::Index>(t)) = vectors.row(codes[t]);
  }
  return q;
}

ForwardOutput SingleCodec::Forward(const Tensor& seg1, const Tensor& seg2,
                                   int batch, bool training) {
  ForwardOutput out;
  // seg1 is ignored by variants without a reference encoder.
  if (reference_) out.g = ReferenceEmbedding(seg1, batch, true);
  out.latent = encoder_.Forward(seg2, out.g, batch).latent;
  if (training) {
    auto q = quantizer_.QuantizeForTraining(out.latent);
    out.quantization = std::move(q.result);
    out.quantized = q.straight_through;
    out.commitment = q.commitment;
  } else {
    out.quantization = quantizer_.Quantize(out.latent.value());
    out.quantized = Tensor(out.quantization.quantized);
    out.commitment = Tensor(Matrix::Constant(1, 1, static_cast<float>(
                                                       out.quantization.commitment_loss)));
  }
  out.mel_hat = decoder_.Forward(out.quantized, out.g, batch);
  return out;
}

}  // namespace singlecodec
