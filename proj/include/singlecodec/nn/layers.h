// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_NN_LAYERS_H_
#define SINGLECODEC_NN_LAYERS_H_

#include <memory>
#include <vector>

#include "singlecodec/nn/module.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec::nn {

class LinearLayer : public Module {
 public:
  LinearLayer(int in, int out, Rng& rng, bool bias = true);
  Tensor Forward(const Tensor& x) const { return nn::Linear(x, w_, b_); }

  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  Tensor w_, b_;
};

class Conv1dLayer : public Module {
 public:
  Conv1dLayer(int in, int out, int kernel, Rng& rng, int stride = 1,
              int pad = -1);
  Tensor Forward(const Tensor& x, int batch) const {
    return Conv1d(x, w_, b_, batch, kernel_, stride_, pad_);
  }
  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  int kernel_, stride_, pad_;
  Tensor w_, b_;
};

class ConvTranspose1dLayer : public Module {
 public:
  ConvTranspose1dLayer(int in, int out, int kernel, int stride, int pad,
                       Rng& rng);
  Tensor Forward(const Tensor& x, int batch) const {
    return ConvTranspose1d(x, w_, b_, batch, kernel_, stride_, pad_);
  }

 private:
  int kernel_, stride_, pad_;
  Tensor w_, b_;
};

class DepthwiseConv1dLayer : public Module {
 public:
  DepthwiseConv1dLayer(int channels, int kernel, Rng& rng);
  Tensor Forward(const Tensor& x, int batch) const {
    return DepthwiseConv1d(x, w_, b_, batch, kernel_);
  }

 private:
  int kernel_;
  Tensor w_, b_;
};

class Conv2dLayer : public Module {
 public:
  Conv2dLayer(int in, int out, int kernel, int stride, Rng& rng);
  // Returns the output together with its spatial size.
  Tensor Forward(const Tensor& x, int batch, int height, int width,
                 int* out_height, int* out_width) const;

  int kernel() const { return kernel_; }
  int stride() const { return stride_; }

 private:
  int kernel_, stride_;
  Tensor w_, b_;
};

class LayerNormLayer : public Module {
 public:
  explicit LayerNormLayer(int dim);
  Tensor Forward(const Tensor& x) const { return LayerNorm(x, gamma_, beta_); }

 private:
  Tensor gamma_, beta_;
};

// Stacked bidirectional LSTM; output width 2 * hidden.
class BiLstm : public Module {
 public:
  BiLstm(int in, int hidden, int layers, Rng& rng);
  Tensor Forward(const Tensor& x, int batch) const;
  int output_dim() const { return 2 * hidden_; }

 private:
  struct Direction {
    Tensor w_ih, w_hh, b;
  };
  int hidden_;
  std::vector<Direction> forward_, backward_;
};

// Single-layer GRU summarising a sequence into its final hidden state.
class Gru : public Module {
 public:
  Gru(int in, int hidden, Rng& rng);
  Tensor Forward(const Tensor& x, int batch) const {
    return GruFinalState(x, w_ih_, w_hh_, b_ih_, b_hh_, batch);
  }

 private:
  Tensor w_ih_, w_hh_, b_ih_, b_hh_;
};

}  // namespace singlecodec::nn

#endif  // SINGLECODEC_NN_LAYERS_H_
