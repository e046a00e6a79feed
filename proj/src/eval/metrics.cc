// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

void CheckSameShape(const nn::Matrix& a, const nn::Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(fmt::format("{}: shapes [{} x {}] and [{} x {}] differ", what, a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
}

Eigen::MatrixXd DctBasis(int n, int count) {
  Eigen::MatrixXd basis(n, count);
  for (int k = 0; k < count; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      basis(i, k) = scale * std::cos(std::numbers::pi / n * (i + 0.5) * k);
    }
  }
  return basis;
}

std::string Cell(std::optional<double> v) { return v ? fmt::format("{:.4f}", *v) : "-"; }

}  // namespace

Eigen::MatrixXd LogMelCepstrum(const nn::Matrix& log_mel, int count) {
  if (count < 1 || count > log_mel.cols()) {
    throw InvalidInput(fmt::format("cepstrum: {} coefficients from {} mel bins", count,
                                   log_mel.cols()));
  }
  return log_mel.cast<double>() * DctBasis(static_cast<int>(log_mel.cols()), count);
}

double Mcd(const nn::Matrix& a, const nn::Matrix& b) {
  CheckSameShape(a, b, "mcd");
  if (a.rows() == 0) throw InvalidInput("mcd: empty input");
  const int count = kMcdCoefficients + 1;
  const Eigen::MatrixXd diff =
      (LogMelCepstrum(a, count) - LogMelCepstrum(b, count)).rightCols(kMcdCoefficients);
  const double k = 10.0 * std::numbers::sqrt2 / std::numbers::ln10;
  return k * diff.rowwise().norm().mean();
}

double MelL1(const nn::Matrix& a, const nn::Matrix& b) {
  CheckSameShape(a, b, "mel_l1");
  if (a.size() == 0) throw InvalidInput("mel_l1: empty input");
  return (a.cast<double>() - b.cast<double>()).cwiseAbs().mean();
}

Eigen::VectorXd SpeakerEmbedding(const nn::Matrix& mel) {
  if (mel.rows() < kSpeakerProxyMinFrames) {
    throw InsufficientData(fmt::format("speaker proxy needs >= {} frames, got {}",
                                       kSpeakerProxyMinFrames, mel.rows()));
  }
  const Eigen::MatrixXd m = mel.cast<double>();
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const Eigen::RowVectorXd var =
      (m.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(m.rows());
  Eigen::VectorXd e(2 * m.cols());
  e << mean.transpose(), var.transpose().cwiseSqrt();
  return e;
}

double SpeakerCosineProxy(const nn::Matrix& a, const nn::Matrix& b) {
  const Eigen::VectorXd ea = SpeakerEmbedding(a), eb = SpeakerEmbedding(b);
  if (ea.size() != eb.size()) throw ShapeError("speaker proxy: mel bin counts differ");
  const double na = ea.norm(), nb = eb.norm();
  if (na == 0.0 || nb == 0.0) throw InvalidInput("speaker proxy: all-zero embedding");
  return std::clamp(ea.dot(eb) / (na * nb), -1.0, 1.0);
}

int CodeBits(int64_t codebook_size) {
  if (codebook_size < 2) throw InvalidInput("codebook_size must be >= 2");
  int bits = 0;
  while ((int64_t{1} << bits) < codebook_size) ++bits;
  return bits;
}

double Bandwidth(int64_t sample_rate, int64_t hop, int64_t downsample_factor,
                 int64_t codebook_size) {
  if (sample_rate <= 0 || hop <= 0 || downsample_factor <= 0) {
    throw InvalidInput("bandwidth: sample_rate, hop and downsample_factor must be positive");
  }
  const double tokens_per_second =
      static_cast<double>(sample_rate) / static_cast<double>(hop * downsample_factor);
  return tokens_per_second * CodeBits(codebook_size);
}

int64_t ReportedBandwidth(double bps) { return static_cast<int64_t>(std::floor(bps)); }

MetricReport AggregateReports(const std::vector<MetricReport>& reports,
                              const std::string& id) {
  if (reports.empty()) throw InsufficientData("no metric reports to aggregate");
  MetricReport m;
  m.utterance_id = id;
  const double n = static_cast<double>(reports.size());
  bool stoi = true, pesq = true, utmos = true;
  double s = 0, p = 0, u = 0;
  for (const MetricReport& r : reports) {
    m.bandwidth_bps += r.bandwidth_bps / n;
    m.mcd += r.mcd / n;
    m.speaker_cosine += r.speaker_cosine / n;
    m.mel_l1 += r.mel_l1 / n;
    m.perplexity += r.perplexity / n;
    m.utilization += r.utilization / n;
    stoi = stoi && r.stoi;
    pesq = pesq && r.pesq;
    utmos = utmos && r.utmos;
    if (r.stoi) s += *r.stoi / n;
    if (r.pesq) p += *r.pesq / n;
    if (r.utmos) u += *r.utmos / n;
  }
  if (stoi) m.stoi = s;
  if (pesq) m.pesq = p;
  if (utmos) m.utmos = u;
  return m;
}

std::string MetricReportHeader() {
  return "id\tbandwidth_bps\tstoi\tpesq\tutmos\tmcd\tspk_proxy\tmel_l1\tperplexity\t"
         "utilization";
}

std::string FormatMetricReport(const MetricReport& r) {
  return fmt::format("{}\t{}\t{}\t{}\t{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.2f}\t{:.4f}",
                     r.utterance_id, ReportedBandwidth(r.bandwidth_bps), Cell(r.stoi),
                     Cell(r.pesq), Cell(r.utmos), r.mcd, r.speaker_cosine, r.mel_l1,
                     r.perplexity, r.utilization);
}

void WriteMetricReports(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << MetricReportHeader() << '\n';
  for (const MetricReport& r : reports) out << FormatMetricReport(r) << '\n';
  if (!reports.empty()) out << FormatMetricReport(AggregateReports(reports)) << '\n';
}

}  // namespace singlecodec
