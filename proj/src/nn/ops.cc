// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "singlecodec/errors.h"

namespace singlecodec::nn {

namespace {

using Index = Eigen::Index;

void CheckSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch [" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     "] vs [" + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + "]");
  }
}

int TimeOf(const Matrix& x, int batch, const char* op) {
  if (batch <= 0 || x.rows() % batch != 0) {
    throw ShapeError(std::string(op) + ": rows " + std::to_string(x.rows()) +
                     " not divisible by batch " + std::to_string(batch));
  }
  return static_cast<int>(x.rows() / batch);
}

inline float SigmoidScalar(float v) { return 1.0f / (1.0f + std::exp(-v)); }

Matrix SigmoidOf(const Matrix& x) {
  return x.unaryExpr([](float v) { return SigmoidScalar(v); });
}

// Copies `count` floats; used by the im2col style gathers.
inline void CopyRow(const float* src, float* dst, Index count) {
  std::copy_n(src, count, dst);
}

inline void AddRow(const float* src, float* dst, Index count) {
  for (Index i = 0; i < count; ++i) dst[i] += src[i];
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "Add");
  return MakeResult(a.value() + b.value(), {a, b}, [a, b](const Matrix& g) {
    AccumulateGrad(a, g);
    AccumulateGrad(b, g);
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "Sub");
  return MakeResult(a.value() - b.value(), {a, b}, [a, b](const Matrix& g) {
    AccumulateGrad(a, g);
    if (b.requires_grad()) AccumulateGrad(b, -g);
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "Mul");
  return MakeResult(a.value().cwiseProduct(b.value()), {a, b},
                    [a, b](const Matrix& g) {
                      if (a.requires_grad())
                        AccumulateGrad(a, g.cwiseProduct(b.value()));
                      if (b.requires_grad())
                        AccumulateGrad(b, g.cwiseProduct(a.value()));
                    });
}

Tensor Scale(const Tensor& x, float s) {
  return MakeResult(x.value() * s, {x},
                    [x, s](const Matrix& g) { AccumulateGrad(x, g * s); });
}

Tensor AddScalar(const Tensor& x, float s) {
  Matrix y = x.value().array() + s;
  return MakeResult(std::move(y), {x},
                    [x](const Matrix& g) { AccumulateGrad(x, g); });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw ShapeError("MatMul: inner dims differ");
  return MakeResult(a.value() * b.value(), {a, b}, [a, b](const Matrix& g) {
    if (a.requires_grad()) AccumulateGrad(a, g * b.value().transpose());
    if (b.requires_grad()) AccumulateGrad(b, a.value().transpose() * g);
  });
}

Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.cols() != w.rows()) {
    throw ShapeError("Linear: input width " + std::to_string(x.cols()) +
                     " != weight rows " + std::to_string(w.rows()));
  }
  Matrix y = x.value() * w.value();
  if (b.defined()) y.rowwise() += b.value().row(0);
  return MakeResult(std::move(y), {x, w, b}, [x, w, b](const Matrix& g) {
    if (x.requires_grad()) AccumulateGrad(x, g * w.value().transpose());
    if (w.requires_grad()) AccumulateGrad(w, x.value().transpose() * g);
    if (b.requires_grad()) AccumulateGrad(b, g.colwise().sum());
  });
}

Tensor BroadcastOverTime(const Tensor& g, int time) {
  const Index batch = g.rows();
  const Index cols = g.cols();
  Matrix y(batch * time, cols);
  for (Index b = 0; b < batch; ++b) {
    for (int t = 0; t < time; ++t) y.row(b * time + t) = g.value().row(b);
  }
  return MakeResult(std::move(y), {g}, [g, batch, cols, time](const Matrix& gy) {
    Matrix gg = Matrix::Zero(batch, cols);
    for (Index b = 0; b < batch; ++b) {
      gg.row(b) = gy.middleRows(b * time, time).colwise().sum();
    }
    AccumulateGrad(g, gg);
  });
}

Tensor ConcatCols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw ShapeError("ConcatCols: row mismatch");
  Matrix y(a.rows(), a.cols() + b.cols());
  y.leftCols(a.cols()) = a.value();
  y.rightCols(b.cols()) = b.value();
  const Index ac = a.cols();
  const Index bc = b.cols();
  return MakeResult(std::move(y), {a, b}, [a, b, ac, bc](const Matrix& g) {
    if (a.requires_grad()) AccumulateGrad(a, g.leftCols(ac));
    if (b.requires_grad()) AccumulateGrad(b, g.rightCols(bc));
  });
}

Tensor SliceCols(const Tensor& x, int start, int count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw ShapeError("SliceCols: range out of bounds");
  }
  Matrix y = x.value().middleCols(start, count);
  const Index rows = x.rows();
  const Index cols = x.cols();
  return MakeResult(std::move(y), {x},
                    [x, start, count, rows, cols](const Matrix& g) {
                      Matrix gx = Matrix::Zero(rows, cols);
                      gx.middleCols(start, count) = g;
                      AccumulateGrad(x, gx);
                    });
}

Tensor Reshape(const Tensor& x, int rows, int cols) {
  if (static_cast<Index>(rows) * cols != x.value().size()) {
    throw ShapeError("Reshape: element count mismatch");
  }
  Matrix y = Eigen::Map<const Matrix>(x.value().data(), rows, cols);
  const Index xr = x.rows();
  const Index xc = x.cols();
  return MakeResult(std::move(y), {x}, [x, xr, xc](const Matrix& g) {
    AccumulateGrad(x, Eigen::Map<const Matrix>(g.data(), xr, xc));
  });
}

Tensor Relu(const Tensor& x) {
  Matrix y = x.value().cwiseMax(0.0f);
  return MakeResult(std::move(y), {x}, [x](const Matrix& g) {
    AccumulateGrad(x, (x.value().array() > 0.0f).select(g, 0.0f));
  });
}

Tensor LeakyRelu(const Tensor& x, float slope) {
  Matrix y = (x.value().array() > 0.0f).select(x.value(), x.value() * slope);
  return MakeResult(std::move(y), {x}, [x, slope](const Matrix& g) {
    AccumulateGrad(x, (x.value().array() > 0.0f).select(g, g * slope));
  });
}

Tensor Silu(const Tensor& x) {
  Matrix s = SigmoidOf(x.value());
  Matrix y = x.value().cwiseProduct(s);
  return MakeResult(std::move(y), {x}, [x, s](const Matrix& g) {
    Matrix d = s.array() * (1.0f + x.value().array() * (1.0f - s.array()));
    AccumulateGrad(x, g.cwiseProduct(d));
  });
}

Tensor Sigmoid(const Tensor& x) {
  Matrix y = SigmoidOf(x.value());
  Matrix yc = y;
  return MakeResult(std::move(y), {x}, [x, yc](const Matrix& g) {
    AccumulateGrad(x, g.array() * yc.array() * (1.0f - yc.array()));
  });
}

Tensor Tanh(const Tensor& x) {
  Matrix y = x.value().array().tanh();
  Matrix yc = y;
  return MakeResult(std::move(y), {x}, [x, yc](const Matrix& g) {
    AccumulateGrad(x, g.array() * (1.0f - yc.array().square()));
  });
}

Tensor Glu(const Tensor& x) {
  if (x.cols() % 2 != 0) throw ShapeError("Glu: odd channel count");
  const Index half = x.cols() / 2;
  Matrix a = x.value().leftCols(half);
  Matrix s = SigmoidOf(x.value().rightCols(half));
  Matrix y = a.cwiseProduct(s);
  return MakeResult(std::move(y), {x}, [x, a, s, half](const Matrix& g) {
    Matrix gx(g.rows(), 2 * half);
    gx.leftCols(half) = g.cwiseProduct(s);
    gx.rightCols(half) =
        (g.array() * a.array() * s.array() * (1.0f - s.array())).matrix();
    AccumulateGrad(x, gx);
  });
}

Tensor Mean(const Tensor& x) {
  const double n = static_cast<double>(x.value().size());
  Matrix y(1, 1);
  y(0, 0) = static_cast<float>(x.value().cast<double>().sum() / n);
  const Index r = x.rows();
  const Index c = x.cols();
  return MakeResult(std::move(y), {x}, [x, n, r, c](const Matrix& g) {
    AccumulateGrad(x, Matrix::Constant(r, c, static_cast<float>(g(0, 0) / n)));
  });
}

Tensor MeanAbsError(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "MeanAbsError");
  Matrix diff = a.value() - b.value();
  const double n = static_cast<double>(diff.size());
  Matrix y(1, 1);
  y(0, 0) = static_cast<float>(diff.cast<double>().cwiseAbs().sum() / n);
  return MakeResult(std::move(y), {a, b}, [a, b, diff, n](const Matrix& g) {
    const float scale = static_cast<float>(g(0, 0) / n);
    Matrix d = diff.unaryExpr([scale](float v) {
      return v > 0.0f ? scale : (v < 0.0f ? -scale : 0.0f);
    });
    if (a.requires_grad()) AccumulateGrad(a, d);
    if (b.requires_grad()) AccumulateGrad(b, -d);
  });
}

Tensor MeanSquaredError(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "MeanSquaredError");
  Matrix diff = a.value() - b.value();
  const double n = static_cast<double>(diff.size());
  Matrix y(1, 1);
  y(0, 0) = static_cast<float>(diff.cast<double>().squaredNorm() / n);
  return MakeResult(std::move(y), {a, b}, [a, b, diff, n](const Matrix& g) {
    Matrix d = diff * static_cast<float>(2.0 * g(0, 0) / n);
    if (a.requires_grad()) AccumulateGrad(a, d);
    if (b.requires_grad()) AccumulateGrad(b, -d);
  });
}

Tensor StraightThrough(const Tensor& c, const Matrix& quantized) {
  CheckSameShape(c.value(), quantized, "StraightThrough");
  return MakeResult(quantized, {c},
                    [c](const Matrix& g) { AccumulateGrad(c, g); });
}

Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int batch,
              int kernel, int stride, int pad) {
  const Matrix& xv = x.value();
  const int time = TimeOf(xv, batch, "Conv1d");
  const Index cin = xv.cols();
  if (w.rows() != kernel * cin) {
    throw ShapeError("Conv1d: weight rows " + std::to_string(w.rows()) +
                     " != kernel*in " + std::to_string(kernel * cin));
  }
  const int tout = (time + 2 * pad - kernel) / stride + 1;
  if (tout < 1) throw ShapeError("Conv1d: input shorter than kernel");

  auto cols = std::make_shared<Matrix>(
      Matrix::Zero(static_cast<Index>(batch) * tout, kernel * cin));
  for (int bi = 0; bi < batch; ++bi) {
    for (int t = 0; t < tout; ++t) {
      float* dst = cols->row(static_cast<Index>(bi) * tout + t).data();
      for (int k = 0; k < kernel; ++k) {
        const int src = t * stride - pad + k;
        if (src < 0 || src >= time) continue;
        CopyRow(xv.row(static_cast<Index>(bi) * time + src).data(),
                dst + k * cin, cin);
      }
    }
  }
  Matrix y = (*cols) * w.value();
  if (b.defined()) y.rowwise() += b.value().row(0);

  return MakeResult(
      std::move(y), {x, w, b},
      [x, w, b, cols, batch, kernel, stride, pad, time, tout,
       cin](const Matrix& g) {
        if (w.requires_grad()) AccumulateGrad(w, cols->transpose() * g);
        if (b.requires_grad()) AccumulateGrad(b, g.colwise().sum());
        if (!x.requires_grad()) return;
        Matrix gc = g * w.value().transpose();
        Matrix gx = Matrix::Zero(x.rows(), cin);
        for (int bi = 0; bi < batch; ++bi) {
          for (int t = 0; t < tout; ++t) {
            const float* src = gc.row(static_cast<Index>(bi) * tout + t).data();
            for (int k = 0; k < kernel; ++k) {
              const int dst = t * stride - pad + k;
              if (dst < 0 || dst >= time) continue;
              AddRow(src + k * cin,
                     gx.row(static_cast<Index>(bi) * time + dst).data(), cin);
            }
          }
        }
        AccumulateGrad(x, gx);
      });
}

Tensor ConvTranspose1d(const Tensor& x, const Tensor& w, const Tensor& b,
                       int batch, int kernel, int stride, int pad) {
  const Matrix& xv = x.value();
  const int time = TimeOf(xv, batch, "ConvTranspose1d");
  if (w.rows() != xv.cols() || w.cols() % kernel != 0) {
    throw ShapeError("ConvTranspose1d: weight shape mismatch");
  }
  const Index cout = w.cols() / kernel;
  const int tout = (time - 1) * stride - 2 * pad + kernel;
  if (tout < 1) throw ShapeError("ConvTranspose1d: empty output");

  Matrix contrib = xv * w.value();
  Matrix y = Matrix::Zero(static_cast<Index>(batch) * tout, cout);
  for (int bi = 0; bi < batch; ++bi) {
    for (int t = 0; t < time; ++t) {
      const float* src = contrib.row(static_cast<Index>(bi) * time + t).data();
      for (int k = 0; k < kernel; ++k) {
        const int dst = t * stride - pad + k;
        if (dst < 0 || dst >= tout) continue;
        AddRow(src + k * cout, y.row(static_cast<Index>(bi) * tout + dst).data(),
               cout);
      }
    }
  }
  if (b.defined()) y.rowwise() += b.value().row(0);

  return MakeResult(
      std::move(y), {x, w, b},
      [x, w, b, batch, kernel, stride, pad, time, tout, cout](const Matrix& g) {
        if (b.requires_grad()) AccumulateGrad(b, g.colwise().sum());
        if (!x.requires_grad() && !w.requires_grad()) return;
        Matrix gcontrib = Matrix::Zero(x.rows(), kernel * cout);
        for (int bi = 0; bi < batch; ++bi) {
          for (int t = 0; t < time; ++t) {
            float* dst = gcontrib.row(static_cast<Index>(bi) * time + t).data();
            for (int k = 0; k < kernel; ++k) {
              const int src = t * stride - pad + k;
              if (src < 0 || src >= tout) continue;
              CopyRow(g.row(static_cast<Index>(bi) * tout + src).data(),
                      dst + k * cout, cout);
            }
          }
        }
        if (x.requires_grad())
          AccumulateGrad(x, gcontrib * w.value().transpose());
        if (w.requires_grad())
          AccumulateGrad(w, x.value().transpose() * gcontrib);
      });
}

Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, const Tensor& b,
                       int batch, int kernel) {
  const Matrix& xv = x.value();
  const int time = TimeOf(xv, batch, "DepthwiseConv1d");
  if (w.rows() != kernel || w.cols() != xv.cols()) {
    throw ShapeError("DepthwiseConv1d: weight shape mismatch");
  }
  const int left = (kernel - 1) / 2;
  Matrix y = Matrix::Zero(xv.rows(), xv.cols());
  for (int bi = 0; bi < batch; ++bi) {
    for (int t = 0; t < time; ++t) {
      auto out = y.row(static_cast<Index>(bi) * time + t);
      for (int k = 0; k < kernel; ++k) {
        const int src = t + k - left;
        if (src < 0 || src >= time) continue;
        out += xv.row(static_cast<Index>(bi) * time + src).cwiseProduct(
            w.value().row(k));
      }
    }
  }
  if (b.defined()) y.rowwise() += b.value().row(0);

  return MakeResult(
      std::move(y), {x, w, b}, [x, w, b, batch, kernel, time, left](const Matrix& g) {
        if (b.requires_grad()) AccumulateGrad(b, g.colwise().sum());
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        Matrix gw = Matrix::Zero(w.rows(), w.cols());
        for (int bi = 0; bi < batch; ++bi) {
          for (int t = 0; t < time; ++t) {
            const Index row = static_cast<Index>(bi) * time + t;
            for (int k = 0; k < kernel; ++k) {
              const int src = t + k - left;
              if (src < 0 || src >= time) continue;
              const Index srow = static_cast<Index>(bi) * time + src;
              gx.row(srow) += g.row(row).cwiseProduct(w.value().row(k));
              gw.row(k) += g.row(row).cwiseProduct(x.value().row(srow));
            }
          }
        }
        AccumulateGrad(x, gx);
        AccumulateGrad(w, gw);
      });
}

Tensor AvgPoolTime(const Tensor& x, int factor) {
  if (factor < 1 || x.rows() % factor != 0) {
    throw ShapeError("AvgPoolTime: factor does not divide frame count");
  }
  const Index out_rows = x.rows() / factor;
  Matrix y(out_rows, x.cols());
  for (Index i = 0; i < out_rows; ++i) {
    y.row(i) = x.value().middleRows(i * factor, factor).colwise().sum() /
               static_cast<float>(factor);
  }
  return MakeResult(std::move(y), {x}, [x, factor, out_rows](const Matrix& g) {
    Matrix gx(x.rows(), x.cols());
    const float inv = 1.0f / static_cast<float>(factor);
    for (Index i = 0; i < out_rows; ++i) {
      for (int j = 0; j < factor; ++j) gx.row(i * factor + j) = g.row(i) * inv;
    }
    AccumulateGrad(x, gx);
  });
}

Tensor RepeatTime(const Tensor& x, int factor) {
  if (factor < 1) throw ShapeError("RepeatTime: factor must be >= 1");
  const Index in_rows = x.rows();
  Matrix y(in_rows * factor, x.cols());
  for (Index i = 0; i < in_rows; ++i) {
    for (int j = 0; j < factor; ++j) y.row(i * factor + j) = x.value().row(i);
  }
  return MakeResult(std::move(y), {x}, [x, factor, in_rows](const Matrix& g) {
    Matrix gx(in_rows, x.cols());
    for (Index i = 0; i < in_rows; ++i) {
      gx.row(i) = g.middleRows(i * factor, factor).colwise().sum();
    }
    AccumulateGrad(x, gx);
  });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 float eps) {
  const Matrix& xv = x.value();
  const Index n = xv.rows();
  const Index c = xv.cols();
  if (gamma.cols() != c || beta.cols() != c) {
    throw ShapeError("LayerNorm: affine width mismatch");
  }
  auto xhat = std::make_shared<Matrix>(n, c);
  auto inv_std = std::make_shared<Eigen::VectorXf>(n);
  for (Index i = 0; i < n; ++i) {
    const float mean = xv.row(i).mean();
    const float var = (xv.row(i).array() - mean).square().mean();
    const float is = 1.0f / std::sqrt(var + eps);
    (*inv_std)(i) = is;
    xhat->row(i) = (xv.row(i).array() - mean) * is;
  }
  Matrix y = xhat->array().rowwise() * gamma.value().row(0).array();
  y.rowwise() += beta.value().row(0);

  return MakeResult(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, xhat, inv_std, n, c](const Matrix& g) {
        if (gamma.requires_grad())
          AccumulateGrad(gamma, g.cwiseProduct(*xhat).colwise().sum());
        if (beta.requires_grad()) AccumulateGrad(beta, g.colwise().sum());
        if (!x.requires_grad()) return;
        Matrix dxhat = g.array().rowwise() * gamma.value().row(0).array();
        Matrix gx(n, c);
        for (Index i = 0; i < n; ++i) {
          const float m1 = dxhat.row(i).mean();
          const float m2 = dxhat.row(i).cwiseProduct(xhat->row(i)).mean();
          gx.row(i) = (*inv_std)(i) *
                      (dxhat.row(i).array() - m1 - xhat->row(i).array() * m2);
        }
        AccumulateGrad(x, gx);
      });
}

Tensor MultiHeadAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                          int batch, int heads) {
  CheckSameShape(q.value(), k.value(), "MultiHeadAttention");
  CheckSameShape(q.value(), v.value(), "MultiHeadAttention");
  const int time = TimeOf(q.value(), batch, "MultiHeadAttention");
  const Index dim = q.cols();
  if (heads < 1 || dim % heads != 0) {
    throw ShapeError("MultiHeadAttention: heads must divide width");
  }
  const Index dh = dim / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

  auto probs = std::make_shared<std::vector<Matrix>>(
      static_cast<size_t>(batch) * heads);
  Matrix y(q.rows(), dim);
  for (int bi = 0; bi < batch; ++bi) {
    const Index r0 = static_cast<Index>(bi) * time;
    for (int h = 0; h < heads; ++h) {
      auto qb = q.value().block(r0, h * dh, time, dh);
      auto kb = k.value().block(r0, h * dh, time, dh);
      auto vb = v.value().block(r0, h * dh, time, dh);
      Matrix s = (qb * kb.transpose()) * scale;
      for (Index i = 0; i < time; ++i) {
        const float mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
      }
      y.block(r0, h * dh, time, dh) = s * vb;
      (*probs)[static_cast<size_t>(bi) * heads + h] = std::move(s);
    }
  }

  return MakeResult(
      std::move(y), {q, k, v},
      [q, k, v, probs, batch, heads, time, dh, scale](const Matrix& g) {
        Matrix gq = Matrix::Zero(q.rows(), q.cols());
        Matrix gk = Matrix::Zero(k.rows(), k.cols());
        Matrix gv = Matrix::Zero(v.rows(), v.cols());
        for (int bi = 0; bi < batch; ++bi) {
          const Index r0 = static_cast<Index>(bi) * time;
          for (int h = 0; h < heads; ++h) {
            const Matrix& p = (*probs)[static_cast<size_t>(bi) * heads + h];
            auto qb = q.value().block(r0, h * dh, time, dh);
            auto kb = k.value().block(r0, h * dh, time, dh);
            auto vb = v.value().block(r0, h * dh, time, dh);
            auto gb = g.block(r0, h * dh, time, dh);
            gv.block(r0, h * dh, time, dh) = p.transpose() * gb;
            Matrix dp = gb * vb.transpose();
            Matrix ds(time, time);
            for (Index i = 0; i < time; ++i) {
              const float dot = dp.row(i).dot(p.row(i));
              ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
            }
            gq.block(r0, h * dh, time, dh) = (ds * kb) * scale;
            gk.block(r0, h * dh, time, dh) = (ds.transpose() * qb) * scale;
          }
        }
        AccumulateGrad(q, gq);
        AccumulateGrad(k, gk);
        AccumulateGrad(v, gv);
      });
}

namespace {

// Gathers rows {b * time + t : b} into a [batch x C] matrix.
Matrix GatherStep(const Matrix& x, int batch, int time, int t) {
  Matrix out(batch, x.cols());
  for (int bi = 0; bi < batch; ++bi) {
    out.row(bi) = x.row(static_cast<Index>(bi) * time + t);
  }
  return out;
}

void ScatterStep(const Matrix& step, int batch, int time, int t, Matrix& x) {
  for (int bi = 0; bi < batch; ++bi) {
    x.row(static_cast<Index>(bi) * time + t) = step.row(bi);
  }
}

struct LstmCache {
  std::vector<Matrix> gates;  // per step [batch x 4H], post-activation
  std::vector<Matrix> cell;   // per step c_t
  std::vector<Matrix> tanh_cell;
};

}  // namespace

Tensor Lstm(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
            const Tensor& b, int batch, bool reverse) {
  const int time = TimeOf(x.value(), batch, "Lstm");
  const Index hidden = w_hh.rows();
  if (w_ih.rows() != x.cols() || w_ih.cols() != 4 * hidden ||
      w_hh.cols() != 4 * hidden || b.cols() != 4 * hidden) {
    throw ShapeError("Lstm: weight shape mismatch");
  }
  Matrix xw = x.value() * w_ih.value();
  xw.rowwise() += b.value().row(0);

  auto cache = std::make_shared<LstmCache>();
  cache->gates.resize(time);
  cache->cell.resize(time);
  cache->tanh_cell.resize(time);
  Matrix y(x.rows(), hidden);
  Matrix h = Matrix::Zero(batch, hidden);
  Matrix c = Matrix::Zero(batch, hidden);
  for (int s = 0; s < time; ++s) {
    const int t = reverse ? time - 1 - s : s;
    Matrix z = GatherStep(xw, batch, time, t) + h * w_hh.value();
    Matrix gates(batch, 4 * hidden);
    gates.leftCols(2 * hidden) = SigmoidOf(z.leftCols(2 * hidden));
    gates.middleCols(2 * hidden, hidden) =
        z.middleCols(2 * hidden, hidden).array().tanh();
    gates.rightCols(hidden) = SigmoidOf(z.rightCols(hidden));
    c = gates.middleCols(hidden, hidden).cwiseProduct(c) +
        gates.leftCols(hidden).cwiseProduct(gates.middleCols(2 * hidden, hidden));
    Matrix tc = c.array().tanh();
    h = gates.rightCols(hidden).cwiseProduct(tc);
    ScatterStep(h, batch, time, t, y);
    cache->gates[s] = std::move(gates);
    cache->cell[s] = c;
    cache->tanh_cell[s] = std::move(tc);
  }

  Matrix yc = y;
  return MakeResult(
      std::move(y), {x, w_ih, w_hh, b},
      [x, w_ih, w_hh, b, cache, yc, batch, time, hidden, reverse](const Matrix& g) {
        Matrix gxw(x.rows(), 4 * hidden);
        Matrix gwhh = Matrix::Zero(hidden, 4 * hidden);
        Matrix dh_next = Matrix::Zero(batch, hidden);
        Matrix dc_next = Matrix::Zero(batch, hidden);
        for (int s = time - 1; s >= 0; --s) {
          const int t = reverse ? time - 1 - s : s;
          const Matrix& gates = cache->gates[s];
          auto gi = gates.leftCols(hidden);
          auto gf = gates.middleCols(hidden, hidden);
          auto gg = gates.middleCols(2 * hidden, hidden);
          auto go = gates.rightCols(hidden);
          const Matrix& tc = cache->tanh_cell[s];
          Matrix c_prev = s > 0 ? cache->cell[s - 1]
                                : Matrix::Zero(batch, hidden).eval();
          Matrix h_prev(batch, hidden);
          if (s > 0) {
            const int tp = reverse ? time - s : s - 1;
            h_prev = GatherStep(yc, batch, time, tp);
          } else {
            h_prev.setZero();
          }

          Matrix dh = GatherStep(g, batch, time, t) + dh_next;
          Matrix dz(batch, 4 * hidden);
          Matrix dc = dh.cwiseProduct(go).cwiseProduct(
                          (1.0f - tc.array().square()).matrix()) +
                      dc_next;
          dz.rightCols(hidden) =
              (dh.array() * tc.array() * go.array() * (1.0f - go.array()))
                  .matrix();
          dz.leftCols(hidden) =
              (dc.array() * gg.array() * gi.array() * (1.0f - gi.array()))
                  .matrix();
          dz.middleCols(hidden, hidden) =
              (dc.array() * c_prev.array() * gf.array() * (1.0f - gf.array()))
                  .matrix();
          dz.middleCols(2 * hidden, hidden) =
              (dc.array() * gi.array() * (1.0f - gg.array().square())).matrix();
          dc_next = dc.cwiseProduct(gf);
          dh_next = dz * w_hh.value().transpose();
          gwhh.noalias() += h_prev.transpose() * dz;
          ScatterStep(dz, batch, time, t, gxw);
        }
        if (x.requires_grad()) AccumulateGrad(x, gxw * w_ih.value().transpose());
        if (w_ih.requires_grad())
          AccumulateGrad(w_ih, x.value().transpose() * gxw);
        AccumulateGrad(w_hh, gwhh);
        if (b.requires_grad()) AccumulateGrad(b, gxw.colwise().sum());
      });
}

namespace {

struct GruCache {
  std::vector<Matrix> r, z, n, hn, h_prev;
};

}  // namespace

Tensor GruFinalState(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
                     const Tensor& b_ih, const Tensor& b_hh, int batch) {
  const int time = TimeOf(x.value(), batch, "GruFinalState");
  const Index hidden = w_hh.rows();
  if (w_ih.rows() != x.cols() || w_ih.cols() != 3 * hidden ||
      w_hh.cols() != 3 * hidden || b_ih.cols() != 3 * hidden ||
      b_hh.cols() != 3 * hidden) {
    throw ShapeError("GruFinalState: weight shape mismatch");
  }
  Matrix xw = x.value() * w_ih.value();
  xw.rowwise() += b_ih.value().row(0);

  auto cache = std::make_shared<GruCache>();
  Matrix h = Matrix::Zero(batch, hidden);
  for (int t = 0; t < time; ++t) {
    Matrix xs = GatherStep(xw, batch, time, t);
    Matrix hw = h * w_hh.value();
    hw.rowwise() += b_hh.value().row(0);
    Matrix r = SigmoidOf(xs.leftCols(hidden) + hw.leftCols(hidden));
    Matrix z = SigmoidOf(xs.middleCols(hidden, hidden) +
                         hw.middleCols(hidden, hidden));
    Matrix hn = hw.rightCols(hidden);
    Matrix n = (xs.rightCols(hidden) + r.cwiseProduct(hn)).array().tanh();
    cache->h_prev.push_back(h);
    h = (1.0f - z.array()) * n.array() + z.array() * h.array();
    cache->r.push_back(std::move(r));
    cache->z.push_back(std::move(z));
    cache->n.push_back(std::move(n));
    cache->hn.push_back(std::move(hn));
  }

  return MakeResult(
      std::move(h), {x, w_ih, w_hh, b_ih, b_hh},
      [x, w_ih, w_hh, b_ih, b_hh, cache, batch, time, hidden](const Matrix& g) {
        Matrix gxw(x.rows(), 3 * hidden);
        Matrix gwhh = Matrix::Zero(hidden, 3 * hidden);
        RowVector gbhh = RowVector::Zero(3 * hidden);
        Matrix dh = g;
        for (int t = time - 1; t >= 0; --t) {
          const Matrix& r = cache->r[t];
          const Matrix& z = cache->z[t];
          const Matrix& n = cache->n[t];
          const Matrix& hn = cache->hn[t];
          const Matrix& hp = cache->h_prev[t];
          Matrix dn = dh.cwiseProduct((1.0f - z.array()).matrix());
          Matrix dz = dh.cwiseProduct(hp - n);
          Matrix dh_prev = dh.cwiseProduct(z);
          Matrix dn_pre = dn.array() * (1.0f - n.array().square());
          Matrix dr = dn_pre.cwiseProduct(hn);
          Matrix dr_pre = dr.array() * r.array() * (1.0f - r.array());
          Matrix dz_pre = dz.array() * z.array() * (1.0f - z.array());
          Matrix dxs(batch, 3 * hidden);
          dxs << dr_pre, dz_pre, dn_pre;
          Matrix dhw(batch, 3 * hidden);
          dhw << dr_pre, dz_pre, dn_pre.cwiseProduct(r);
          dh_prev.noalias() += dhw * w_hh.value().transpose();
          gwhh.noalias() += hp.transpose() * dhw;
          gbhh += dhw.colwise().sum();
          ScatterStep(dxs, batch, time, t, gxw);
          dh = std::move(dh_prev);
        }
        if (x.requires_grad()) AccumulateGrad(x, gxw * w_ih.value().transpose());
        if (w_ih.requires_grad())
          AccumulateGrad(w_ih, x.value().transpose() * gxw);
        AccumulateGrad(w_hh, gwhh);
        if (b_ih.requires_grad()) AccumulateGrad(b_ih, gxw.colwise().sum());
        AccumulateGrad(b_hh, gbhh);
      });
}

Tensor Conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int batch,
              const Conv2dGeometry& geom) {
  const Matrix& xv = x.value();
  const Index cin = xv.cols();
  if (xv.rows() != static_cast<Index>(batch) * geom.height * geom.width) {
    throw ShapeError("Conv2d: rows do not match batch*height*width");
  }
  if (w.rows() != geom.kernel_h * geom.kernel_w * cin) {
    throw ShapeError("Conv2d: weight rows do not match kernel area * in");
  }
  const int ho = geom.out_height();
  const int wo = geom.out_width();
  if (ho < 1 || wo < 1) throw ShapeError("Conv2d: empty output");

  const Index out_rows = static_cast<Index>(batch) * ho * wo;
  auto cols = std::make_shared<Matrix>(Matrix::Zero(out_rows, w.rows()));
  auto src_row = [&geom](int bi, int h, int ww) {
    return (static_cast<Index>(bi) * geom.height + h) * geom.width + ww;
  };
  for (int bi = 0; bi < batch; ++bi) {
    for (int oh = 0; oh < ho; ++oh) {
      for (int ow = 0; ow < wo; ++ow) {
        float* dst =
            cols->row((static_cast<Index>(bi) * ho + oh) * wo + ow).data();
        for (int i = 0; i < geom.kernel_h; ++i) {
          const int h = oh * geom.stride_h - geom.pad_h + i;
          if (h < 0 || h >= geom.height) continue;
          for (int j = 0; j < geom.kernel_w; ++j) {
            const int ww = ow * geom.stride_w - geom.pad_w + j;
            if (ww < 0 || ww >= geom.width) continue;
            CopyRow(xv.row(src_row(bi, h, ww)).data(),
                    dst + (i * geom.kernel_w + j) * cin, cin);
          }
        }
      }
    }
  }
  Matrix y = (*cols) * w.value();
  if (b.defined()) y.rowwise() += b.value().row(0);

  return MakeResult(
      std::move(y), {x, w, b},
      [x, w, b, cols, batch, geom, ho, wo, cin](const Matrix& g) {
        if (w.requires_grad()) AccumulateGrad(w, cols->transpose() * g);
        if (b.requires_grad()) AccumulateGrad(b, g.colwise().sum());
        if (!x.requires_grad()) return;
        Matrix gc = g * w.value().transpose();
        Matrix gx = Matrix::Zero(x.rows(), cin);
        for (int bi = 0; bi < batch; ++bi) {
          for (int oh = 0; oh < ho; ++oh) {
            for (int ow = 0; ow < wo; ++ow) {
              const float* src =
                  gc.row((static_cast<Index>(bi) * ho + oh) * wo + ow).data();
              for (int i = 0; i < geom.kernel_h; ++i) {
                const int h = oh * geom.stride_h - geom.pad_h + i;
                if (h < 0 || h >= geom.height) continue;
                for (int j = 0; j < geom.kernel_w; ++j) {
                  const int ww = ow * geom.stride_w - geom.pad_w + j;
                  if (ww < 0 || ww >= geom.width) continue;
                  const Index row =
                      (static_cast<Index>(bi) * geom.height + h) * geom.width +
                      ww;
                  AddRow(src + (i * geom.kernel_w + j) * cin, gx.row(row).data(),
                         cin);
                }
              }
            }
          }
        }
        AccumulateGrad(x, gx);
      });
}

}  // namespace singlecodec::nn
