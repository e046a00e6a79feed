// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/codec_io/bitstream.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

constexpr char kMagic[4] = {'S', 'C', '0', '1'};

void PutLe(std::vector<uint8_t>& out, uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint64_t Le(int n, const char* what) {
    Need(n, what);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const uint8_t> Take(size_t n, const char* what) {
    Need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void Need(size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(fmt::format("token stream truncated at byte offset {}: {} needs {} "
                                    "bytes, {} available",
                                    pos_, what, n, bytes_.size() - pos_));
    }
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace

size_t PayloadBytes(size_t n_tokens, int bits) {
  return (n_tokens * static_cast<size_t>(bits) + 7) / 8;
}

std::vector<uint8_t> PackTokens(const TokenStream& s) {
  const int bits = s.codebook_bits;
  if (bits < 1 || bits > 32) throw InvalidInput(fmt::format("codebook_bits {} not in [1, 32]", bits));
  if (s.codes.size() > std::numeric_limits<uint32_t>::max()) {
    throw InvalidInput("too many tokens for a u32 count");
  }
  if (s.embedding.size() > std::numeric_limits<uint16_t>::max()) {
    throw InvalidInput("embedding too long for a u16 dimension");
  }
  const uint64_t limit = uint64_t{1} << bits;
  std::vector<uint8_t> out;
  out.reserve(kTokenHeaderBytes + 4 * s.embedding.size() + PayloadBytes(s.codes.size(), bits) + 2);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutLe(out, s.sample_rate, 4);
  PutLe(out, s.hop, 2);
  PutLe(out, s.downsample_factor, 1);
  PutLe(out, s.codebook_bits, 1);
  PutLe(out, s.codes.size(), 4);
  PutLe(out, s.embedding.size(), 2);
  for (float f : s.embedding) PutLe(out, std::bit_cast<uint32_t>(f), 4);

  uint64_t acc = 0;
  int filled = 0;
  for (size_t i = 0; i < s.codes.size(); ++i) {
    if (s.codes[i] >= limit) {
      throw InvalidInput(fmt::format("code {} at position {} does not fit in {} bits",
                                     s.codes[i], i, bits));
    }
    acc = (acc << bits) | s.codes[i];
    filled += bits;
    while (filled >= 8) {
      filled -= 8;
      out.push_back(static_cast<uint8_t>(acc >> filled));
    }
    acc &= (uint64_t{1} << filled) - 1;
  }
  if (filled > 0) out.push_back(static_cast<uint8_t>(acc << (8 - filled)));
  if (s.pad_frames > 0) PutLe(out, s.pad_frames, 2);
  return out;
}

TokenStream UnpackTokens(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.Take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 2) != 0) {
    throw FormatError("token stream: bad magic at byte offset 0");
  }
  if (std::memcmp(magic.data() + 2, kMagic + 2, 2) != 0) {
    throw FormatError(fmt::format("token stream: unsupported version '{}{}' at byte offset 2",
                                  static_cast<char>(magic[2]), static_cast<char>(magic[3])));
  }
  TokenStream s;
  s.sample_rate = static_cast<uint32_t>(r.Le(4, "sample_rate"));
  s.hop = static_cast<uint16_t>(r.Le(2, "hop"));
  s.downsample_factor = static_cast<uint8_t>(r.Le(1, "downsample_factor"));
  s.codebook_bits = static_cast<uint8_t>(r.Le(1, "codebook_bits"));
  const size_t n_tokens = r.Le(4, "n_tokens");
  const size_t embed_dim = r.Le(2, "embed_dim");
  const int bits = s.codebook_bits;
  if (bits < 1 || bits > 32) {
    throw FormatError(fmt::format("token stream: codebook_bits {} at byte offset 10", bits));
  }
  s.embedding.resize(embed_dim);
  for (size_t i = 0; i < embed_dim; ++i) {
    s.embedding[i] = std::bit_cast<float>(static_cast<uint32_t>(r.Le(4, "embedding")));
  }
  const size_t payload_start = r.pos();
  auto payload = r.Take(PayloadBytes(n_tokens, bits), "payload");
  s.codes.resize(n_tokens);
  uint64_t acc = 0;
  int filled = 0;
  size_t next = 0;
  const uint64_t mask = (uint64_t{1} << bits) - 1;
  for (size_t i = 0; i < n_tokens; ++i) {
    while (filled < bits) {
      acc = (acc << 8) | payload[next++];
      filled += 8;
    }
    filled -= bits;
    s.codes[i] = static_cast<uint32_t>((acc >> filled) & mask);
    acc &= (uint64_t{1} << filled) - 1;
  }
  if (acc != 0) {
    throw FormatError(fmt::format("token stream: non-zero padding bits at byte offset {}",
                                  payload_start + payload.size() - 1));
  }
  if (r.remaining() == 2) {
    s.pad_frames = static_cast<uint16_t>(r.Le(2, "pad_frames"));
  } else if (r.remaining() != 0) {
    throw FormatError(fmt::format("token stream: {} unexpected bytes at byte offset {}",
                                  r.remaining(), r.pos()));
  }
  return s;
}

void WriteTokenFile(const std::filesystem::path& path, const TokenStream& stream) {
  const std::vector<uint8_t> bytes = PackTokens(stream);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

TokenStream ReadTokenFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return UnpackTokens(bytes);
}

}  // namespace singlecodec
