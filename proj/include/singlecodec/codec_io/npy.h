// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_CODEC_IO_NPY_H_
#define SINGLECODEC_CODEC_IO_NPY_H_

#include <filesystem>

#include "singlecodec/nn/tensor.h"

namespace singlecodec {

// 2-D little-endian float32 arrays in NumPy's .npy v1.0 layout (C order).
void WriteNpy(const std::filesystem::path& path, const nn::Matrix& m);
// Accepts only '<f4' 2-D C-order arrays; FormatError otherwise.
nn::Matrix ReadNpy(const std::filesystem::path& path);

}  // namespace singlecodec

#endif  // SINGLECODEC_CODEC_IO_NPY_H_
