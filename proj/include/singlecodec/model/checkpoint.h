// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_MODEL_CHECKPOINT_H_
#define SINGLECODEC_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "singlecodec/model/codec.h"

namespace singlecodec {

inline constexpr uint32_t kCheckpointVersion = 1;

// Binary container: "SCKP", u32 version, u32 metadata length, metadata JSON,
// u32 array count, then per array: u32 name length, name, u32 rows,
// u32 cols, rows * cols little-endian float32 values (row-major).
struct CheckpointData {
  uint32_t version = kCheckpointVersion;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, nn::Matrix> arrays;
};

void WriteCheckpoint(const std::filesystem::path& path, const CheckpointData& data);
// Throws IoError if unreadable, FormatError on bad magic, unsupported
// version or truncation.
CheckpointData ReadCheckpoint(const std::filesystem::path& path);

// Model parameters under "model.<name>", the codebook under "codebook.*",
// the config under meta["config"].
void StoreModel(const SingleCodec& model, CheckpointData& data);
// Rebuilds the model from meta["config"] and restores every array. Throws
// FormatError if a parameter is missing or mis-shaped.
std::unique_ptr<SingleCodec> RestoreModel(const CheckpointData& data);
// Copies stored arrays into an existing module under `prefix`.
void RestoreParameters(const CheckpointData& data, const std::string& prefix,
                       nn::Module& module);

}  // namespace singlecodec

#endif  // SINGLECODEC_MODEL_CHECKPOINT_H_
