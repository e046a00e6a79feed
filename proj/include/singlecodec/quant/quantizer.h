// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_QUANT_QUANTIZER_H_
#define SINGLECODEC_QUANT_QUANTIZER_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "singlecodec/nn/tensor.h"

namespace singlecodec {

struct QuantizerConfig {
  int codebook_size = 8192;
  int dim = 256;
  float decay = 0.99f;
  float epsilon = 1e-5f;
  float commitment_weight = 0.25f;
  bool reseed_dead_codes = true;
  int dead_code_steps = 200;

  void Validate() const;
};

struct Codebook {
  nn::Matrix vectors;            // [K x D]
  Eigen::VectorXf ema_cluster_size;  // [K]
  nn::Matrix ema_embed_sum;      // [K x D]
  // Step at which each code was last assigned; drives dead-code reseeding.
  std::vector<int64_t> last_used;
  bool initialized = false;

  int size() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

struct QuantizationResult {
  std::vector<int> codes;
  nn::Matrix quantized;  // quantized.row(t) == vectors.row(codes[t])
  double commitment_loss = 0.0;
  double perplexity = 1.0;
};

// Nearest codebook row for each row of `c`, ties to the lowest index.
// Candidates are screened with a float GEMM and near-ties settled in double
// precision, so the result equals an exhaustive double-precision search.
// Throws NumericalError on non-finite input.
std::vector<int> NearestCodes(const nn::Matrix& c, const nn::Matrix& vectors);

// mean((c - q)^2) with `quantized` held constant; gradient reaches c only.
nn::Tensor CommitmentLoss(const nn::Tensor& c, const nn::Matrix& quantized);

double Perplexity(const std::vector<int>& codes, int codebook_size);
double Utilization(const std::vector<int>& codes, int codebook_size);

class VectorQuantizer {
 public:
  VectorQuantizer(QuantizerConfig config, uint64_t seed);

  // Inference path, no autograd.
  QuantizationResult Quantize(const nn::Matrix& c) const;

  // Training path: `straight_through` carries the quantized values forward
  // and copies its gradient to `c`; `commitment` is the unweighted loss.
  struct TrainOutput {
    QuantizationResult result;
    nn::Tensor straight_through;
    nn::Tensor commitment;
  };
  TrainOutput QuantizeForTraining(const nn::Tensor& c);

  // EMA codebook update from a batch of latents and their assignments.
  // `step` feeds dead-code tracking.
  void EmaUpdate(const nn::Matrix& c, const std::vector<int>& codes,
                 int64_t step);

  // Seeds the codebook from rows of `c` (sampled with replacement) plus
  // small noise. Called automatically by the first QuantizeForTraining.
  void InitializeFrom(const nn::Matrix& c);

  const QuantizerConfig& config() const { return config_; }
  const Codebook& codebook() const { return codebook_; }
  Codebook& mutable_codebook() { return codebook_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  QuantizerConfig config_;
  Codebook codebook_;
  std::mt19937_64 rng_;
};

}  // namespace singlecodec

#endif  // SINGLECODEC_QUANT_QUANTIZER_H_
