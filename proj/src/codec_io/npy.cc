// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/codec_io/npy.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <string>

#include <fmt/format.h>

#include "singlecodec/errors.h"

namespace singlecodec {

static_assert(std::endian::native == std::endian::little);

void WriteNpy(const std::filesystem::path& path, const nn::Matrix& m) {
  std::string dict = fmt::format("{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}), }}",
                                 m.rows(), m.cols());
  const size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const uint16_t len = static_cast<uint16_t>(dict.size());
  out.write("\x93NUMPY\x01\x00", 8);
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out << dict;
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!out) throw IoError("write failed for " + path.string());
}

nn::Matrix ReadNpy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[10];
  if (!in.read(magic, 10) || std::memcmp(magic, "\x93NUMPY", 6) != 0 || magic[6] != 1) {
    throw FormatError(path.string() + ": not a version 1 .npy file");
  }
  const size_t len = static_cast<uint8_t>(magic[8]) | (static_cast<uint8_t>(magic[9]) << 8);
  std::string dict(len, '\0');
  if (!in.read(dict.data(), static_cast<std::streamsize>(len))) {
    throw FormatError(path.string() + ": truncated .npy header");
  }
  static const std::regex kHeader(
      R"(\{'descr':\s*'<f4',\s*'fortran_order':\s*False,\s*'shape':\s*\((\d+),\s*(\d+)\),?\s*\})");
  std::smatch match;
  if (!std::regex_search(dict, match, kHeader)) {
    throw FormatError(path.string() + ": expected a 2-D '<f4' C-order array");
  }
  nn::Matrix m(std::stol(match[1]), std::stol(match[2]));
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(float)))) {
    throw FormatError(path.string() + ": truncated .npy data");
  }
  return m;
}

}  // namespace singlecodec
