// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_CODEC_IO_BITSTREAM_H_
#define SINGLECODEC_CODEC_IO_BITSTREAM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace singlecodec {

// Fixed 18-byte little-endian header:
//   "SC01" | u32 sample_rate | u16 hop | u8 downsample_factor |
//   u8 codebook_bits | u32 n_tokens | u16 embed_dim
// followed by embed_dim little-endian float32 values, then the codes packed
// most-significant-bit first at codebook_bits each, zero-padded to a byte.
// A stream whose last chunk was padded ends with a u16 little-endian count
// of padded mel frames; unpadded streams have no trailer.
inline constexpr int kTokenHeaderBytes = 18;

struct TokenStream {
  uint32_t sample_rate = 24000;
  uint16_t hop = 256;
  uint8_t downsample_factor = 4;
  uint8_t codebook_bits = 13;
  std::vector<uint32_t> codes;
  std::vector<float> embedding;
  uint16_t pad_frames = 0;

  bool operator==(const TokenStream&) const = default;
};

// ceil(n_tokens * bits / 8).
size_t PayloadBytes(size_t n_tokens, int bits);

// Throws InvalidInput if a code does not fit in codebook_bits, bits is
// outside [1, 32], or a count overflows its field.
std::vector<uint8_t> PackTokens(const TokenStream& stream);
// Throws FormatError (with the byte offset) on bad magic, unsupported
// version, truncation, non-zero padding bits or unexpected trailing bytes.
TokenStream UnpackTokens(std::span<const uint8_t> bytes);

void WriteTokenFile(const std::filesystem::path& path, const TokenStream& stream);
TokenStream ReadTokenFile(const std::filesystem::path& path);

}  // namespace singlecodec

#endif  // SINGLECODEC_CODEC_IO_BITSTREAM_H_
