// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_EVAL_METRICS_H_
#define SINGLECODEC_EVAL_METRICS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "singlecodec/nn/tensor.h"

namespace singlecodec {

inline constexpr int kMcdCoefficients = 13;

// Orthonormal DCT-II over the mel axis of each frame: [frames x n_mels] ->
// [frames x count], coefficients 0..count-1.
Eigen::MatrixXd LogMelCepstrum(const nn::Matrix& log_mel, int count);

// Frame-aligned mel cepstral distortion in dB over cepstral coefficients
// 1..13 (the 0th is excluded), constant 10 * sqrt(2) / ln(10).
double Mcd(const nn::Matrix& a, const nn::Matrix& b);

double MelL1(const nn::Matrix& a, const nn::Matrix& b);

inline constexpr int kSpeakerProxyMinFrames = 50;

// Per-bin temporal mean followed by per-bin population standard deviation.
Eigen::VectorXd SpeakerEmbedding(const nn::Matrix& mel);
// Cosine of the two speaker embeddings, clamped to [-1, 1]. Throws
// InsufficientData below 50 frames and InvalidInput for an all-zero
// embedding.
double SpeakerCosineProxy(const nn::Matrix& a, const nn::Matrix& b);

// Bits per token: log2(codebook_size), rounded up when not a power of two.
int CodeBits(int64_t codebook_size);
// sample_rate / (hop * downsample_factor) tokens per second times CodeBits.
double Bandwidth(int64_t sample_rate, int64_t hop, int64_t downsample_factor,
                 int64_t codebook_size);
int64_t ReportedBandwidth(double bps);

struct MetricReport {
  std::string utterance_id;
  double bandwidth_bps = 0.0;
  double mcd = 0.0;
  double speaker_cosine = 0.0;
  double mel_l1 = 0.0;
  double perplexity = 0.0;
  double utilization = 0.0;
  // Slots for externally computed scores.
  std::optional<double> stoi, pesq, utmos;
};

// Mean of every field; an external slot is averaged only if all reports
// carry it. `utterance_id` is set to `id`.
MetricReport AggregateReports(const std::vector<MetricReport>& reports,
                              const std::string& id = "mean");

// Tab-separated: a header line, one row per report, then the aggregate row.
// Bandwidth is printed floored; absent external scores print as "-".
void WriteMetricReports(std::ostream& out, const std::vector<MetricReport>& reports);
std::string MetricReportHeader();
std::string FormatMetricReport(const MetricReport& r);

}  // namespace singlecodec

#endif  // SINGLECODEC_EVAL_METRICS_H_
