// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/quant/quantizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "singlecodec/errors.h"
#include "singlecodec/nn/ops.h"

namespace singlecodec {

using nn::Matrix;

void QuantizerConfig::Validate() const {
  if (codebook_size < 1 || dim < 1) {
    throw ConfigError("quantizer: codebook_size and dim must be >= 1");
  }
  if (!(decay >= 0.0f && decay < 1.0f)) {
    throw ConfigError("quantizer: decay must lie in [0, 1)");
  }
  if (!(epsilon > 0.0f)) throw ConfigError("quantizer: epsilon must be > 0");
  if (!(commitment_weight >= 0.0f)) {
    throw ConfigError("quantizer: commitment_weight must be >= 0");
  }
  if (dead_code_steps < 1) throw ConfigError("quantizer: dead_code_steps must be >= 1");
}

std::vector<int> NearestCodes(const Matrix& c, const Matrix& vectors) {
  if (c.cols() != vectors.cols()) {
    throw ShapeError("NearestCodes: latent dim " + std::to_string(c.cols()) +
                     " vs codebook dim " + std::to_string(vectors.cols()));
  }
  if (vectors.rows() == 0) throw ShapeError("NearestCodes: empty codebook");
  if (!c.allFinite()) throw NumericalError("quantize: non-finite latent");
  const Eigen::Index n = c.rows(), k = vectors.rows();
  std::vector<int> codes(n);
  if (n == 0) return codes;

  const Eigen::VectorXf code_norms = vectors.rowwise().squaredNorm();
  const float max_code_norm = code_norms.maxCoeff();
  // score = |e|^2 - 2 c.e, which orders codes like |c - e|^2.
  Matrix scores = -2.0f * (c * vectors.transpose());
  scores.rowwise() += code_norms.transpose();

  for (Eigen::Index t = 0; t < n; ++t) {
    const float* row = scores.row(t).data();
    const float best = *std::min_element(row, row + k);
    const float scale = c.row(t).squaredNorm() + max_code_norm;
    const float tol = 1e-4f * scale + 1e-6f;
    int best_index = -1;
    double best_exact = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (row[j] > best + tol) continue;
      double d = 0.0;
      for (Eigen::Index i = 0; i < c.cols(); ++i) {
        const double diff =
            static_cast<double>(c(t, i)) - static_cast<double>(vectors(j, i));
        d += diff * diff;
      }
      if (d < best_exact) {
        best_exact = d;
        best_index = static_cast<int>(j);
      }
    }
    codes[t] = best_index;
  }
  return codes;
}

nn::Tensor CommitmentLoss(const nn::Tensor& c, const Matrix& quantized) {
  if (c.rows() != quantized.rows() || c.cols() != quantized.cols()) {
    throw ShapeError("commitment_loss: shape mismatch");
  }
  return nn::MeanSquaredError(c, nn::Tensor(quantized));
}

double Perplexity(const std::vector<int>& codes, int codebook_size) {
  if (codes.empty()) throw InvalidInput("perplexity: empty code sequence");
  std::unordered_map<int, int64_t> counts;
  for (int code : codes) {
    if (code < 0 || code >= codebook_size) {
      throw InvalidInput("perplexity: code " + std::to_string(code) +
                         " outside codebook");
    }
    ++counts[code];
  }
  const double n = static_cast<double>(codes.size());
  double entropy = 0.0;
  for (const auto& [code, count] : counts) {
    const double p = static_cast<double>(count) / n;
    entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

double Utilization(const std::vector<int>& codes, int codebook_size) {
  if (codes.empty()) throw InvalidInput("utilization: empty code sequence");
  std::vector<char> seen(codebook_size, 0);
  int distinct = 0;
  for (int code : codes) {
    if (code < 0 || code >= codebook_size) {
      throw InvalidInput("utilization: code " + std::to_string(code) +
                         " outside codebook");
    }
    if (!seen[code]) {
      seen[code] = 1;
      ++distinct;
    }
  }
  return static_cast<double>(distinct) / codebook_size;
}

VectorQuantizer::VectorQuantizer(QuantizerConfig config, uint64_t seed)
    : config_(config), rng_(seed) {
  config_.Validate();
  const int k = config_.codebook_size, d = config_.dim;
  std::normal_distribution<float> normal(0.0f, 1.0f);
  codebook_.vectors.resize(k, d);
  for (Eigen::Index i = 0; i < codebook_.vectors.size(); ++i) {
    codebook_.vectors.data()[i] = normal(rng_);
  }
  codebook_.ema_cluster_size = Eigen::VectorXf::Ones(k);
  codebook_.ema_embed_sum = codebook_.vectors;
  codebook_.last_used.assign(k, 0);
}

QuantizationResult VectorQuantizer::Quantize(const Matrix& c) const {
  QuantizationResult result;
  result.codes = NearestCodes(c, codebook_.vectors);
  result.quantized.resize(c.rows(), c.cols());
  for (Eigen::Index t = 0; t < c.rows(); ++t) {
    result.quantized.row(t) = codebook_.vectors.row(result.codes[t]);
  }
  if (c.size() > 0) {
    result.commitment_loss =
        (c.cast<double>() - result.quantized.cast<double>()).squaredNorm() /
        static_cast<double>(c.size());
    result.perplexity = Perplexity(result.codes, config_.codebook_size);
  }
  return result;
}

VectorQuantizer::TrainOutput VectorQuantizer::QuantizeForTraining(
    const nn::Tensor& c) {
  if (!c.value().allFinite()) throw NumericalError("quantize: non-finite latent");
  if (!codebook_.initialized) InitializeFrom(c.value());
  TrainOutput out;
  out.result = Quantize(c.value());
  out.straight_through = nn::StraightThrough(c, out.result.quantized);
  out.commitment = CommitmentLoss(c, out.result.quantized);
  return out;
}

void VectorQuantizer::InitializeFrom(const Matrix& c) {
  if (c.rows() == 0 || c.cols() != config_.dim) {
    throw ShapeError("quantizer init: expected [N x " +
                     std::to_string(config_.dim) + "] latents");
  }
  const int k = config_.codebook_size;
  std::uniform_int_distribution<Eigen::Index> pick(0, c.rows() - 1);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const float spread =
      std::sqrt(static_cast<float>(c.squaredNorm() / static_cast<double>(c.size()))) + 1e-6f;
  for (int j = 0; j < k; ++j) {
    codebook_.vectors.row(j) = c.row(pick(rng_));
    for (int i = 0; i < config_.dim; ++i) {
      codebook_.vectors(j, i) += 1e-3f * spread * normal(rng_);
    }
  }
  codebook_.ema_cluster_size.setOnes();
  codebook_.ema_embed_sum = codebook_.vectors;
  std::fill(codebook_.last_used.begin(), codebook_.last_used.end(), 0);
  codebook_.initialized = true;
}

void VectorQuantizer::EmaUpdate(const Matrix& c, const std::vector<int>& codes,
                                int64_t step) {
  const int k = config_.codebook_size;
  if (static_cast<Eigen::Index>(codes.size()) != c.rows() ||
      c.cols() != config_.dim) {
    throw ShapeError("ema_update: codes/latents mismatch");
  }
  Eigen::VectorXf counts = Eigen::VectorXf::Zero(k);
  Matrix sums = Matrix::Zero(k, config_.dim);
  for (size_t t = 0; t < codes.size(); ++t) {
    counts[codes[t]] += 1.0f;
    sums.row(codes[t]) += c.row(static_cast<Eigen::Index>(t));
    codebook_.last_used[codes[t]] = step;
  }
  const float decay = config_.decay;
  codebook_.ema_cluster_size =
      decay * codebook_.ema_cluster_size + (1.0f - decay) * counts;
  codebook_.ema_embed_sum = decay * codebook_.ema_embed_sum + (1.0f - decay) * sums;

  // Laplace smoothing keeps every normaliser strictly positive.
  const double total = codebook_.ema_cluster_size.cast<double>().sum();
  const double eps = config_.epsilon;
  for (int j = 0; j < k && total > 0.0; ++j) {
    const double smoothed = (codebook_.ema_cluster_size[j] + eps) /
                            (total + k * eps) * total;
    codebook_.vectors.row(j) =
        (codebook_.ema_embed_sum.row(j).cast<double>() / smoothed).cast<float>();
  }

  if (config_.reseed_dead_codes && c.rows() > 0) {
    std::uniform_int_distribution<Eigen::Index> pick(0, c.rows() - 1);
    for (int j = 0; j < k; ++j) {
      if (step - codebook_.last_used[j] < config_.dead_code_steps) continue;
      codebook_.vectors.row(j) = c.row(pick(rng_));
      codebook_.ema_cluster_size[j] = 1.0f;
      codebook_.ema_embed_sum.row(j) = codebook_.vectors.row(j);
      codebook_.last_used[j] = step;
    }
  }
  if (!codebook_.vectors.allFinite()) {
    throw NumericalError("ema_update produced non-finite codebook vectors");
  }
}

}  // namespace singlecodec
