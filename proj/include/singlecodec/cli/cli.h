// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_CLI_CLI_H_
#define SINGLECODEC_CLI_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "singlecodec/data/manifest.h"
#include "singlecodec/eval/metrics.h"
#include "singlecodec/model/codec.h"

namespace singlecodec {

// Runs one `singlecodec` invocation. Failures print a single line
// "error <Code>: <message>" to `err` and return a nonzero status: 2 for
// usage errors, 1 for everything else.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Encodes and decodes every readable utterance through the token stream and
// scores the reconstruction.
std::vector<MetricReport> EvaluateManifest(const SingleCodec& model,
                                           const DatasetManifest& manifest,
                                           std::ostream* warnings = nullptr);

struct AblationRow {
  std::string variant;
  int64_t parameters = 0;
  MetricReport metrics;
  std::string convergence;  // classifier output, or "n/a" without enough steps
};

std::string AblationHeader();
std::string FormatAblationRow(const AblationRow& row);

}  // namespace singlecodec

#endif  // SINGLECODEC_CLI_CLI_H_
