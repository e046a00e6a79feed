// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_AUDIO_WAV_H_
#define SINGLECODEC_AUDIO_WAV_H_

#include <filesystem>
#include <vector>

namespace singlecodec {

inline constexpr int kDefaultSampleRate = 24000;

// Mono audio with samples nominally in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads 16-bit PCM, 32-bit PCM or 32-bit float RIFF/WAVE. Multichannel input
// is averaged to mono.
AudioClip ReadWav(const std::filesystem::path& path);

// Writes 16-bit PCM mono, clipping to [-1, 1].
void WriteWav(const std::filesystem::path& path, const AudioClip& clip);

// Windowed-sinc (Hann, 16 zero crossings) sample-rate conversion. This is
// the only resampler in the project.
AudioClip Resample(const AudioClip& clip, int target_rate);

}  // namespace singlecodec

#endif  // SINGLECODEC_AUDIO_WAV_H_
