// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/nn/layers.h"

#include <algorithm>
#include <string>

namespace singlecodec::nn {

LinearLayer::LinearLayer(int in, int out, Rng& rng, bool bias) {
  w_ = RegisterParameter("w", UniformInit(in, out, in, rng));
  if (bias) b_ = RegisterParameter("b", UniformInit(1, out, in, rng));
}

Conv1dLayer::Conv1dLayer(int in, int out, int kernel, Rng& rng, int stride,
                         int pad)
    : kernel_(kernel), stride_(stride), pad_(pad < 0 ? (kernel - 1) / 2 : pad) {
  w_ = RegisterParameter("w", UniformInit(kernel * in, out, kernel * in, rng));
  b_ = RegisterParameter("b", UniformInit(1, out, kernel * in, rng));
}

ConvTranspose1dLayer::ConvTranspose1dLayer(int in, int out, int kernel,
                                           int stride, int pad, Rng& rng)
    : kernel_(kernel), stride_(stride), pad_(pad) {
  // Each output frame receives kernel / stride input frames.
  const int fan_in = in * std::max(1, kernel / stride);
  w_ = RegisterParameter("w", UniformInit(in, kernel * out, fan_in, rng));
  b_ = RegisterParameter("b", UniformInit(1, out, fan_in, rng));
}

DepthwiseConv1dLayer::DepthwiseConv1dLayer(int channels, int kernel, Rng& rng)
    : kernel_(kernel) {
  w_ = RegisterParameter("w", UniformInit(kernel, channels, kernel, rng));
  b_ = RegisterParameter("b", UniformInit(1, channels, kernel, rng));
}

Conv2dLayer::Conv2dLayer(int in, int out, int kernel, int stride, Rng& rng)
    : kernel_(kernel), stride_(stride) {
  const int fan_in = kernel * kernel * in;
  w_ = RegisterParameter("w", UniformInit(fan_in, out, fan_in, rng));
  b_ = RegisterParameter("b", UniformInit(1, out, fan_in, rng));
}

Tensor Conv2dLayer::Forward(const Tensor& x, int batch, int height, int width,
                            int* out_height, int* out_width) const {
  Conv2dGeometry geom;
  geom.height = height;
  geom.width = width;
  geom.kernel_h = geom.kernel_w = kernel_;
  geom.stride_h = geom.stride_w = stride_;
  geom.pad_h = geom.pad_w = (kernel_ - 1) / 2;
  *out_height = geom.out_height();
  *out_width = geom.out_width();
  return Conv2d(x, w_, b_, batch, geom);
}

LayerNormLayer::LayerNormLayer(int dim) {
  gamma_ = RegisterParameter("gamma", Matrix::Ones(1, dim));
  beta_ = RegisterParameter("beta", Matrix::Zero(1, dim));
}

BiLstm::BiLstm(int in, int hidden, int layers, Rng& rng) : hidden_(hidden) {
  for (int l = 0; l < layers; ++l) {
    const int layer_in = l == 0 ? in : 2 * hidden;
    for (int dir = 0; dir < 2; ++dir) {
      const std::string prefix =
          std::to_string(l) + (dir == 0 ? ".fwd." : ".bwd.");
      Direction d;
      d.w_ih = RegisterParameter(prefix + "w_ih",
                                 UniformInit(layer_in, 4 * hidden, hidden, rng));
      d.w_hh = RegisterParameter(prefix + "w_hh",
                                 UniformInit(hidden, 4 * hidden, hidden, rng));
      Matrix bias = UniformInit(1, 4 * hidden, hidden, rng);
      bias.middleCols(hidden, hidden).array() += 1.0f;  // forget gate
      d.b = RegisterParameter(prefix + "b", std::move(bias));
      (dir == 0 ? forward_ : backward_).push_back(std::move(d));
    }
  }
}

Tensor BiLstm::Forward(const Tensor& x, int batch) const {
  Tensor h = x;
  for (size_t l = 0; l < forward_.size(); ++l) {
    const Direction& f = forward_[l];
    const Direction& b = backward_[l];
    Tensor hf = Lstm(h, f.w_ih, f.w_hh, f.b, batch, /*reverse=*/false);
    Tensor hb = Lstm(h, b.w_ih, b.w_hh, b.b, batch, /*reverse=*/true);
    h = ConcatCols(hf, hb);
  }
  return h;
}

Gru::Gru(int in, int hidden, Rng& rng) {
  w_ih_ = RegisterParameter("w_ih", UniformInit(in, 3 * hidden, hidden, rng));
  w_hh_ = RegisterParameter("w_hh", UniformInit(hidden, 3 * hidden, hidden, rng));
  b_ih_ = RegisterParameter("b_ih", UniformInit(1, 3 * hidden, hidden, rng));
  b_hh_ = RegisterParameter("b_hh", UniformInit(1, 3 * hidden, hidden, rng));
}

}  // namespace singlecodec::nn
