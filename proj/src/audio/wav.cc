// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint32_t size = ReadU32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    const size_t available = std::min<size_t>(size, bytes.size() - pos - 8);
    if (std::memcmp(data + pos, "fmt ", 4) == 0 && available >= 16) {
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      if (format == 0xFFFE && available >= 26) format = ReadU16(body + 24);
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      pcm = body;
      pcm_bytes = available;
    }
    pos += 8 + size + (size & 1);
  }
  if (pcm == nullptr || channels == 0 || rate == 0) {
    throw FormatError(path.string() + ": missing fmt or data chunk");
  }

  const bool is_float = format == 3 && bits == 32;
  const bool is_pcm16 = format == 1 && bits == 16;
  const bool is_pcm32 = format == 1 && bits == 32;
  if (!is_float && !is_pcm16 && !is_pcm32) {
    throw FormatError(path.string() + ": unsupported sample format");
  }
  const size_t width = bits / 8;
  const size_t frames = pcm_bytes / (width * channels);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      const unsigned char* p = pcm + (f * channels + c) * width;
      if (is_pcm16) {
        acc += static_cast<int16_t>(ReadU16(p)) / 32768.0;
      } else if (is_pcm32) {
        acc += static_cast<int32_t>(ReadU32(p)) / 2147483648.0;
      } else {
        float v;
        uint32_t u = ReadU32(p);
        std::memcpy(&v, &u, sizeof(v));
        acc += v;
      }
    }
    clip.samples[f] = static_cast<float>(acc / channels);
  }
  return clip;
}

void WriteWav(const std::filesystem::path& path, const AudioClip& clip) {
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(clip.sample_rate));
  PutU32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float s : clip.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const auto v = static_cast<int16_t>(std::lrint(c * 32767.0f));
    PutU16(out, static_cast<uint16_t>(v));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

AudioClip Resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0 || clip.sample_rate <= 0) {
    throw InvalidInput("Resample: sample rates must be positive");
  }
  if (target_rate == clip.sample_rate) return clip;
  constexpr int kZeroCrossings = 16;
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to input Nyquist
  const double half_width = kZeroCrossings / cutoff;
  const size_t out_len = static_cast<size_t>(
      std::floor(static_cast<double>(clip.samples.size()) * ratio));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const auto n = static_cast<long>(clip.samples.size());
  for (size_t i = 0; i < out_len; ++i) {
    const double center = static_cast<double>(i) / ratio;
    const long lo = static_cast<long>(std::ceil(center - half_width));
    const long hi = static_cast<long>(std::floor(center + half_width));
    double acc = 0.0;
    for (long j = std::max(0L, lo); j <= std::min(n - 1, hi); ++j) {
      const double x = (static_cast<double>(j) - center) * cutoff;
      const double sinc =
          x == 0.0 ? 1.0
                   : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double window =
          0.5 + 0.5 * std::cos(std::numbers::pi * x / kZeroCrossings);
      acc += clip.samples[static_cast<size_t>(j)] * sinc * window * cutoff;
    }
    out.samples[i] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace singlecodec
