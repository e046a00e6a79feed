// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/data/segments.h"

#include <random>

#include "singlecodec/audio/stft.h"
#include "singlecodec/errors.h"

namespace singlecodec {

nn::Matrix SliceFramesReflect(const nn::Matrix& mel, int start, int length) {
  const int n = static_cast<int>(mel.rows());
  if (n < 1) throw InvalidInput("SliceFramesReflect: empty spectrogram");
  if (start < 0 || start >= n) {
    throw InvalidInput("SliceFramesReflect: start outside the utterance");
  }
  nn::Matrix out(length, mel.cols());
  for (int i = 0; i < length; ++i) {
    const int src = start + i;
    out.row(i) = mel.row(src < n ? src : ReflectIndex(src, n));
  }
  return out;
}

SegmentPair SampleSegments(const MelSpectrogram& mel, uint64_t seed,
                           int seg1_frames, int seg2_frames) {
  const int n = mel.frames();
  if (n < 1) throw InvalidInput("SampleSegments: spectrogram has no frames");
  std::mt19937_64 rng(seed);
  auto draw_start = [&](int length) {
    if (n <= length) return 0;
    std::uniform_int_distribution<int> dist(0, n - length);
    return dist(rng);
  };
  SegmentPair pair;
  pair.seg1_start = draw_start(seg1_frames);
  pair.seg2_start = draw_start(seg2_frames);
  pair.seg1.config = mel.config;
  pair.seg2.config = mel.config;
  pair.seg1.values = SliceFramesReflect(mel.values, pair.seg1_start, seg1_frames);
  pair.seg2.values = SliceFramesReflect(mel.values, pair.seg2_start, seg2_frames);
  return pair;
}

}  // namespace singlecodec
