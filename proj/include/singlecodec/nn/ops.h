// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_NN_OPS_H_
#define SINGLECODEC_NN_OPS_H_

#include "singlecodec/nn/tensor.h"

namespace singlecodec::nn {

// ---- Elementwise and structural ops ----

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, float s);
Tensor AddScalar(const Tensor& x, float s);

Tensor MatMul(const Tensor& a, const Tensor& b);
// x [N x in] * w [in x out] + b [1 x out]. `b` may be undefined.
Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b);

// [batch x C] -> [batch * time x C], each row repeated `time` times.
Tensor BroadcastOverTime(const Tensor& g, int time);

Tensor ConcatCols(const Tensor& a, const Tensor& b);
Tensor SliceCols(const Tensor& x, int start, int count);
// Row-major reinterpretation; the element count must match.
Tensor Reshape(const Tensor& x, int rows, int cols);

Tensor Relu(const Tensor& x);
Tensor LeakyRelu(const Tensor& x, float slope);
Tensor Silu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Tanh(const Tensor& x);
// Splits the columns in half: first * sigmoid(second).
Tensor Glu(const Tensor& x);

// ---- Reductions and losses (all return 1x1) ----

Tensor Mean(const Tensor& x);
Tensor MeanAbsError(const Tensor& a, const Tensor& b);
Tensor MeanSquaredError(const Tensor& a, const Tensor& b);

// Forward value is `quantized`; the gradient is routed unchanged to `c`.
Tensor StraightThrough(const Tensor& c, const Matrix& quantized);

// ---- Sequence ops; inputs are [batch * time x channels] ----

// Weight layout [kernel * in x out]; output length
// (time + 2 * pad - kernel) / stride + 1.
Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int batch,
              int kernel, int stride, int pad);

// Weight layout [in x kernel * out]; output length
// (time - 1) * stride - 2 * pad + kernel.
Tensor ConvTranspose1d(const Tensor& x, const Tensor& w, const Tensor& b,
                       int batch, int kernel, int stride, int pad);

// Per-channel conv, weight [kernel x C], "same" length with symmetric pad.
Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, const Tensor& b,
                       int batch, int kernel);

// Mean over non-overlapping groups of `factor` frames. Requires
// factor | time, so groups never straddle two batch items.
Tensor AvgPoolTime(const Tensor& x, int factor);
// Each frame replicated `factor` times.
Tensor RepeatTime(const Tensor& x, int factor);

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 float eps = 1e-5f);

// Scaled dot-product self attention over each batch item, `heads` heads.
Tensor MultiHeadAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                          int batch, int heads);

// Unidirectional LSTM layer, gate order (i, f, g, o).
// w_ih [in x 4H], w_hh [H x 4H], b [1 x 4H]; returns [batch * time x H].
Tensor Lstm(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
            const Tensor& b, int batch, bool reverse);

// GRU layer, gate order (r, z, n); returns the final hidden state
// [batch x H].
Tensor GruFinalState(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
                     const Tensor& b_ih, const Tensor& b_hh, int batch);

// ---- Image ops; inputs are NHWC [batch * height * width x channels] ----

struct Conv2dGeometry {
  int height = 0;
  int width = 0;
  int kernel_h = 3;
  int kernel_w = 3;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;

  int out_height() const { return (height + 2 * pad_h - kernel_h) / stride_h + 1; }
  int out_width() const { return (width + 2 * pad_w - kernel_w) / stride_w + 1; }
};

// Weight layout [kernel_h * kernel_w * in x out].
Tensor Conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int batch,
              const Conv2dGeometry& geom);

}  // namespace singlecodec::nn

#endif  // SINGLECODEC_NN_OPS_H_
