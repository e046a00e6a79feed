// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_AUDIO_MEL_H_
#define SINGLECODEC_AUDIO_MEL_H_

#include "singlecodec/audio/wav.h"
#include "singlecodec/nn/tensor.h"

namespace singlecodec {

// Analysis parameters. Defaults: 24 kHz, hop 256, window 1024, 100 Slaney
// mel bands over [0, 12000] Hz, natural log with a 1e-5 magnitude floor.
struct MelConfig {
  int sample_rate = kDefaultSampleRate;
  int hop_length = 256;
  int win_length = 1024;
  int fft_size = 1024;
  int n_mels = 100;
  float fmin = 0.0f;
  float fmax = 12000.0f;
  float log_floor = 1e-5f;

  // Throws ConfigError when an invariant is broken.
  void Validate() const;
  double frame_rate() const {
    return static_cast<double>(sample_rate) / hop_length;
  }
  float silence_value() const;

  bool operator==(const MelConfig&) const = default;
};

// Log-mel energies, [n_frames x n_mels].
struct MelSpectrogram {
  nn::Matrix values;
  MelConfig config;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

// Slaney-normalised triangular filters, [fft_size / 2 + 1 x n_mels].
nn::Matrix MelFilterbank(const MelConfig& cfg);

// Centered magnitude STFT -> mel -> log(max(energy, log_floor)).
// Produces floor(len / hop) + 1 frames.
MelSpectrogram ComputeMel(const AudioClip& clip, const MelConfig& cfg);

}  // namespace singlecodec

#endif  // SINGLECODEC_AUDIO_MEL_H_
