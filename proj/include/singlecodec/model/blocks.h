// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_MODEL_BLOCKS_H_
#define SINGLECODEC_MODEL_BLOCKS_H_

#include <memory>
#include <vector>

#include "singlecodec/nn/layers.h"

namespace singlecodec {

// Two residual units; each is LeakyReLU -> conv k3 -> LeakyReLU -> conv k1,
// added back onto its input.
class ResidualBlock : public nn::Module {
 public:
  ResidualBlock(int channels, nn::Rng& rng);
  nn::Tensor Forward(const nn::Tensor& x, int batch) const;

 private:
  std::vector<std::unique_ptr<nn::Conv1dLayer>> convs_;
};

// Time downsampling by `factor`. Hybrid mode sums a strided-conv path and an
// average-pooling path, then mixes channels in -> out with a pointwise
// linear layer. Plain mode is the strided conv alone (in -> out).
class Downsample : public nn::Module {
 public:
  Downsample(int in, int out, int factor, bool hybrid, nn::Rng& rng);
  nn::Tensor Forward(const nn::Tensor& x, int batch) const;
  // Individual paths, exposed for inspection.
  nn::Tensor ConvPath(const nn::Tensor& x, int batch) const;
  nn::Tensor PoolPath(const nn::Tensor& x) const;
  int factor() const { return factor_; }

 private:
  int factor_;
  bool hybrid_;
  std::unique_ptr<nn::Conv1dLayer> conv_;
  std::unique_ptr<nn::LinearLayer> mix_;
};

// Time upsampling by `factor`: transposed conv plus frame replication in
// hybrid mode, transposed conv alone otherwise.
class Upsample : public nn::Module {
 public:
  Upsample(int in, int out, int factor, bool hybrid, nn::Rng& rng);
  nn::Tensor Forward(const nn::Tensor& x, int batch) const;
  nn::Tensor ConvPath(const nn::Tensor& x, int batch) const;
  nn::Tensor RepeatPath(const nn::Tensor& x) const;
  int factor() const { return factor_; }

 private:
  int factor_;
  bool hybrid_;
  std::unique_ptr<nn::ConvTranspose1dLayer> conv_;
  std::unique_ptr<nn::LinearLayer> mix_;
};

// y = x + Up(ResidualBlock(Down(x, r)), r).
class ResampleBlock : public nn::Module {
 public:
  ResampleBlock(int channels, int factor, bool hybrid, nn::Rng& rng);
  nn::Tensor Forward(const nn::Tensor& x, int batch) const;
  nn::Tensor Inner(const nn::Tensor& x, int batch) const;
  // Zeroes every parameter of the inner path, making the block the identity.
  void ZeroInitInner();

 private:
  int factor_;
  Downsample down_;
  ResidualBlock local_;
  Upsample up_;
};

// Macaron Conformer layer: half FFN, self attention, convolution module,
// half FFN, final LayerNorm. The convolution module normalises with
// LayerNorm.
class ConformerLayer : public nn::Module {
 public:
  ConformerLayer(int dim, int heads, int kernel, int ffn_mult, nn::Rng& rng);
  nn::Tensor Forward(const nn::Tensor& x, int batch) const;

 private:
  nn::Tensor FeedForward(const nn::Tensor& x, int which) const;

  int heads_;
  nn::LayerNormLayer ffn1_norm_, attn_norm_, conv_norm_, ffn2_norm_, out_norm_;
  nn::LinearLayer ffn1_in_, ffn1_out_;
  nn::LinearLayer q_, k_, v_, attn_out_;
  nn::LinearLayer pointwise_in_;
  nn::DepthwiseConv1dLayer depthwise_;
  nn::LayerNormLayer depthwise_norm_;
  nn::LinearLayer pointwise_out_;
  nn::LinearLayer ffn2_in_, ffn2_out_;
};

// [time x dim] sinusoidal table.
nn::Matrix SinusoidalPositions(int time, int dim);

// Stride-2 Conv2d stack over the [frames x mels] plane, a GRU over the
// remaining frames, and a projection of its final state to `out_dim`.
// Accepts any number of frames.
class ReferenceEncoder : public nn::Module {
 public:
  ReferenceEncoder(int n_mels, const std::vector<int>& channels, int kernel,
                   int gru_hidden, int out_dim, nn::Rng& rng);
  // mel: [batch * frames x n_mels] -> [batch x out_dim].
  nn::Tensor Forward(const nn::Tensor& mel, int batch) const;

 private:
  int n_mels_;
  std::vector<std::unique_ptr<nn::Conv2dLayer>> convs_;
  int gru_in_;
  std::unique_ptr<nn::Gru> gru_;
  std::unique_ptr<nn::LinearLayer> proj_;
};

}  // namespace singlecodec

#endif  // SINGLECODEC_MODEL_BLOCKS_H_
