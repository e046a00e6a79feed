// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_MODEL_CODEC_H_
#define SINGLECODEC_MODEL_CODEC_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "singlecodec/model/blocks.h"
#include "singlecodec/model/config.h"
#include "singlecodec/quant/quantizer.h"

namespace singlecodec {

class Encoder : public nn::Module {
 public:
  Encoder(const ModelConfig& config, nn::Rng& rng);

  struct Output {
    nn::Tensor latent;       // [batch * T_lat x model_dim]
    nn::Tensor pre_context;  // after g subtraction, before the BLSTM
  };
  // seg2: [batch * frames x n_mels]; g: [batch x model_dim] or undefined
  // when the variant has no reference encoder.
  Output Forward(const nn::Tensor& seg2, const nn::Tensor& g, int batch) const;

 private:
  nn::Tensor SubtractG(const nn::Tensor& x, const nn::Tensor& g,
                       const nn::LinearLayer& proj, int batch) const;

  ModelConfig config_;
  std::unique_ptr<nn::Conv1dLayer> conv_in_;
  std::vector<std::unique_ptr<ResidualBlock>> blocks_;
  std::vector<std::unique_ptr<Downsample>> downs_;
  std::vector<std::unique_ptr<nn::LinearLayer>> block_g_proj_;
  std::unique_ptr<ResampleBlock> resample_;
  std::unique_ptr<nn::LinearLayer> conformer_in_;
  std::vector<std::unique_ptr<ConformerLayer>> conformer_;
  std::unique_ptr<nn::LinearLayer> to_model_;
  std::unique_ptr<nn::LinearLayer> g_proj_;
  std::unique_ptr<nn::BiLstm> blstm_;
  std::unique_ptr<nn::LinearLayer> out_;
};

class Decoder : public nn::Module {
 public:
  Decoder(const ModelConfig& config, nn::Rng& rng);
  // q: [batch * T_lat x model_dim] -> [batch * T_lat * factor x n_mels].
  nn::Tensor Forward(const nn::Tensor& q, const nn::Tensor& g, int batch) const;

 private:
  ModelConfig config_;
  std::unique_ptr<nn::LinearLayer> g_proj_;
  std::unique_ptr<nn::BiLstm> blstm_;
  std::unique_ptr<nn::LinearLayer> in_;
  std::unique_ptr<ResampleBlock> resample_;
  std::vector<std::unique_ptr<ResidualBlock>> blocks_;
  std::vector<std::unique_ptr<Upsample>> ups_;
  std::unique_ptr<nn::LinearLayer> out_;
};

struct ForwardOutput {
  nn::Tensor mel_hat;     // [batch * seg2_frames x n_mels]
  nn::Tensor g;           // [batch x model_dim], undefined without reference
  nn::Tensor latent;      // c
  nn::Tensor quantized;   // straight-through q in training, constant otherwise
  nn::Tensor commitment;  // unweighted commitment loss, 1x1
  QuantizationResult quantization;
};

// Reference encoder + encoder + quantizer + decoder.
class SingleCodec : public nn::Module {
 public:
  SingleCodec(const ModelConfig& config, uint64_t seed);

  // seg1: [batch * ref_frames x n_mels]; seg2: [batch * seg2_frames x n_mels].
  // `training` routes the quantizer through the straight-through estimator
  // and initialises the codebook from the first batch.
  ForwardOutput Forward(const nn::Tensor& seg1, const nn::Tensor& seg2,
                        int batch, bool training);

  // g from a reference segment. `strict` enforces the configured length.
  nn::Tensor ReferenceEmbedding(const nn::Tensor& seg1, int batch,
                                bool strict) const;
  Encoder::Output Encode(const nn::Tensor& seg2, const nn::Tensor& g,
                         int batch) const;
  nn::Tensor Decode(const nn::Tensor& q, const nn::Tensor& g, int batch) const;

  // Decoder input rows for a code sequence.
  nn::Matrix LookupCodes(const std::vector<int>& codes) const;

  const ModelConfig& config() const { return config_; }
  bool has_reference() const { return reference_ != nullptr; }
  Encoder& encoder() { return encoder_; }
  Decoder& decoder() { return decoder_; }
  ReferenceEncoder* reference() { return reference_.get(); }
  VectorQuantizer& quantizer() { return quantizer_; }
  const VectorQuantizer& quantizer() const { return quantizer_; }

 private:
  ModelConfig config_;
  nn::Rng rng_;
  std::unique_ptr<ReferenceEncoder> reference_;
  Encoder encoder_;
  Decoder decoder_;
  VectorQuantizer quantizer_;
};

}  // namespace singlecodec

#endif  // SINGLECODEC_MODEL_CODEC_H_
