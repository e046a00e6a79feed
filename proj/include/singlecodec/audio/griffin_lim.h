// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_AUDIO_GRIFFIN_LIM_H_
#define SINGLECODEC_AUDIO_GRIFFIN_LIM_H_

#include <cstdint>

#include "singlecodec/audio/mel.h"
#include "singlecodec/audio/wav.h"

namespace singlecodec {

inline constexpr int kGriffinLimIterations = 64;

// Least-squares magnitude estimate from log-mel energies: exp(mel) times the
// pseudo-inverse of the filterbank, clamped at zero. [frames x bins].
nn::Matrix MelToMagnitude(const nn::Matrix& log_mel, const MelConfig& cfg);

// Iterative phase reconstruction from a magnitude spectrogram. The initial
// phase is drawn from `seed`. Output length is (frames - 1) * hop.
AudioClip GriffinLim(const nn::Matrix& magnitude, const MelConfig& cfg,
                     int iterations = kGriffinLimIterations, uint64_t seed = 0);

AudioClip MelToAudio(const nn::Matrix& log_mel, const MelConfig& cfg,
                     int iterations = kGriffinLimIterations, uint64_t seed = 0);

}  // namespace singlecodec

#endif  // SINGLECODEC_AUDIO_GRIFFIN_LIM_H_
