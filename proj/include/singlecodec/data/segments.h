// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_DATA_SEGMENTS_H_
#define SINGLECODEC_DATA_SEGMENTS_H_

#include <cstdint>

#include "singlecodec/audio/mel.h"

namespace singlecodec {

inline constexpr int kReferenceFrames = 600;
inline constexpr int kContentFrames = 200;

// Two slices of one utterance: seg1 feeds the reference encoder, seg2 is the
// content actually coded.
struct SegmentPair {
  MelSpectrogram seg1;
  MelSpectrogram seg2;
  int seg1_start = 0;
  int seg2_start = 0;
};

// `length` frames starting at `start`; frames past the end of the utterance
// are filled by reflection (never zeros), so short inputs are padded.
nn::Matrix SliceFramesReflect(const nn::Matrix& mel, int start, int length);

// Draws both start offsets uniformly from their valid ranges using `seed`
// alone, so equal (mel, seed) always give equal pairs.
SegmentPair SampleSegments(const MelSpectrogram& mel, uint64_t seed,
                           int seg1_frames = kReferenceFrames,
                           int seg2_frames = kContentFrames);

}  // namespace singlecodec

#endif  // SINGLECODEC_DATA_SEGMENTS_H_
