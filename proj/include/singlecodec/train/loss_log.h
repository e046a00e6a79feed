// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_TRAIN_LOSS_LOG_H_
#define SINGLECODEC_TRAIN_LOSS_LOG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace singlecodec {

struct LossRecord {
  int64_t step = 0;
  double commitment = 0.0;
  double rec = 0.0;
  double adv = 0.0;
  double perplexity = 0.0;

  bool operator==(const LossRecord&) const = default;
};

// One record per line: step \t commitment \t rec \t adv \t perplexity,
// printed with enough digits to round-trip every double.
std::string FormatLossRecord(const LossRecord& r);
void AppendLossLog(const std::filesystem::path& path,
                   const std::vector<LossRecord>& records);
void WriteLossLog(const std::filesystem::path& path,
                  const std::vector<LossRecord>& records);
// Blank lines and lines starting with '#' are skipped. Throws ParseError
// with the line number.
std::vector<LossRecord> ReadLossLog(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const LossRecord& r);
void from_json(const nlohmann::json& j, LossRecord& r);

struct CommitmentCurve {
  std::vector<int64_t> steps;
  std::vector<double> values;
  int smoothing_window = 25;

  static CommitmentCurve FromLog(const std::vector<LossRecord>& records,
                                 int smoothing_window = 25);
};

enum class Convergence { kDiverging, kFlat, kConverging };
const char* ConvergenceName(Convergence c);

struct ConvergenceThresholds {
  double diverge_ratio = 1.1;
  double converge_ratio = 0.9;
};

// Trailing moving average over `smoothing_window` points, then the mean of
// the final 10% (m_end) against the 40-50% window (m_mid):
// m_end > 1.1 m_mid diverging, m_end < 0.9 m_mid converging, else flat.
// Needs at least 3 * smoothing_window points (InsufficientData otherwise).
Convergence ClassifyConvergence(const CommitmentCurve& curve,
                                const ConvergenceThresholds& thresholds = {});

}  // namespace singlecodec

#endif  // SINGLECODEC_TRAIN_LOSS_LOG_H_
