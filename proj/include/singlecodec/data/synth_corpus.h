// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_DATA_SYNTH_CORPUS_H_
#define SINGLECODEC_DATA_SYNTH_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "singlecodec/audio/wav.h"
#include "singlecodec/data/manifest.h"

namespace singlecodec {

// Formant-synthesised single-speaker "speech": a glottal pulse train with a
// declining pitch contour drives cascaded vowel resonators, interleaved with
// fricative noise, nasals, bursts and pauses. Deterministic per seed.
struct SynthCorpusOptions {
  double total_seconds = 600.0;
  double min_utterance_seconds = 3.0;
  double max_utterance_seconds = 9.0;
  int sample_rate = kDefaultSampleRate;
  double base_f0 = 120.0;
  std::string speaker_id = "spk0";
  uint64_t seed = 20240611;
};

AudioClip SynthesizeUtterance(double seconds, const SynthCorpusOptions& options,
                              std::mt19937_64& rng);

// Writes utt_NNNN.wav files plus `manifest.tsv` into `dir` and returns the
// manifest. Existing files are overwritten.
DatasetManifest SynthesizeCorpus(const std::filesystem::path& dir,
                                 const SynthCorpusOptions& options);

}  // namespace singlecodec

#endif  // SINGLECODEC_DATA_SYNTH_CORPUS_H_
