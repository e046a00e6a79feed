// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/train/loss_log.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "singlecodec/errors.h"

namespace singlecodec {

using nlohmann::json;

std::string FormatLossRecord(const LossRecord& r) {
  return fmt::format("{}\t{}\t{}\t{}\t{}", r.step, r.commitment, r.rec, r.adv,
                     r.perplexity);
}

namespace {

void WriteRecords(const std::filesystem::path& path,
                  const std::vector<LossRecord>& records,
                  std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write loss log " + path.string());
  for (const LossRecord& r : records) out << FormatLossRecord(r) << '\n';
}

template <typename T>
T ParseField(const std::string& s, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(where + "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void AppendLossLog(const std::filesystem::path& path,
                   const std::vector<LossRecord>& records) {
  WriteRecords(path, records, std::ios::app);
}

void WriteLossLog(const std::filesystem::path& path,
                  const std::vector<LossRecord>& records) {
  WriteRecords(path, records, std::ios::trunc);
}

std::vector<LossRecord> ReadLossLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open loss log " + path.string());
  std::vector<LossRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string> f;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 5) {
      throw ParseError(where + "expected 5 tab-separated fields, got " +
                       std::to_string(f.size()));
    }
    LossRecord r;
    r.step = ParseField<int64_t>(f[0], where);
    r.commitment = ParseField<double>(f[1], where);
    r.rec = ParseField<double>(f[2], where);
    r.adv = ParseField<double>(f[3], where);
    r.perplexity = ParseField<double>(f[4], where);
    records.push_back(r);
  }
  return records;
}

void to_json(json& j, const LossRecord& r) {
  j = json::array({r.step, r.commitment, r.rec, r.adv, r.perplexity});
}

void from_json(const json& j, LossRecord& r) {
  r.step = j.at(0).get<int64_t>();
  r.commitment = j.at(1).get<double>();
  r.rec = j.at(2).get<double>();
  r.adv = j.at(3).get<double>();
  r.perplexity = j.at(4).get<double>();
}

CommitmentCurve CommitmentCurve::FromLog(const std::vector<LossRecord>& records,
                                         int smoothing_window) {
  CommitmentCurve curve;
  curve.smoothing_window = smoothing_window;
  for (const LossRecord& r : records) {
    curve.steps.push_back(r.step);
    curve.values.push_back(r.commitment);
  }
  return curve;
}

const char* ConvergenceName(Convergence c) {
  switch (c) {
    case Convergence::kDiverging:
      return "diverging";
    case Convergence::kFlat:
      return "flat";
    case Convergence::kConverging:
      return "converging";
  }
  return "unknown";
}

Convergence ClassifyConvergence(const CommitmentCurve& curve,
                                const ConvergenceThresholds& thresholds) {
  const int w = curve.smoothing_window;
  const size_t n = curve.values.size();
  if (w < 1) throw ConfigError("smoothing_window must be >= 1");
  if (curve.steps.size() != n) throw InvalidInput("curve steps/values length mismatch");
  if (n < static_cast<size_t>(3 * w)) {
    throw InsufficientData("convergence needs at least " + std::to_string(3 * w) +
                           " points, got " + std::to_string(n));
  }
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(curve.values[i]) || curve.values[i] < 0.0) {
      throw InvalidInput("curve values must be finite and non-negative");
    }
    if (i > 0 && curve.steps[i] <= curve.steps[i - 1]) {
      throw InvalidInput("curve steps must be strictly increasing");
    }
  }
  std::vector<double> smooth(n);
  double window_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    window_sum += curve.values[i];
    if (i >= static_cast<size_t>(w)) window_sum -= curve.values[i - w];
    smooth[i] = window_sum / static_cast<double>(std::min<size_t>(i + 1, w));
  }
  auto mean = [&](size_t begin, size_t end) {
    end = std::max(end, begin + 1);
    double s = 0.0;
    for (size_t i = begin; i < end; ++i) s += smooth[i];
    return s / static_cast<double>(end - begin);
  };
  const double m_end = mean(n - std::max<size_t>(1, n / 10), n);
  const double m_mid = mean(n * 4 / 10, n * 5 / 10);
  if (m_end > thresholds.diverge_ratio * m_mid) return Convergence::kDiverging;
  if (m_end < thresholds.converge_ratio * m_mid) return Convergence::kConverging;
  return Convergence::kFlat;
}

}  // namespace singlecodec
