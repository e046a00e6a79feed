// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_DATA_MANIFEST_H_
#define SINGLECODEC_DATA_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singlecodec/audio/mel.h"
#include "singlecodec/data/segments.h"

namespace singlecodec {

struct ManifestEntry {
  std::string utterance_id;
  std::filesystem::path audio_path;
  double duration_seconds = 0.0;
  std::string speaker_id;
};

// Line format: utterance_id \t path \t duration \t speaker_id. Relative
// paths resolve against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  // Indices into `entries` whose audio did not exist at load time.
  std::vector<size_t> missing;
};

// Throws ParseError("<path>:<line>: ...") on malformed records or duplicate
// utterance ids. Blank lines are ignored.
DatasetManifest LoadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);

// Utterance-level log-mel cache keyed by utterance id. Audio at another rate
// goes through Resample() first.
class MelCache {
 public:
  explicit MelCache(MelConfig config) : config_(config) {}
  const MelSpectrogram& Get(const ManifestEntry& entry);
  const MelConfig& config() const { return config_; }

 private:
  MelConfig config_;
  std::map<std::string, MelSpectrogram> mels_;
};

// Loads the audio of `entry` and computes its mel spectrogram.
MelSpectrogram LoadMel(const ManifestEntry& entry, const MelConfig& config);

struct SegmentBatch {
  int64_t batch_id = 0;
  std::vector<std::string> utterance_ids;
  std::vector<SegmentPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  // Stacked [size * frames x n_mels] matrices in batch order.
  nn::Matrix StackSeg1() const;
  nn::Matrix StackSeg2() const;
};

struct BatchOptions {
  int batch_size = 16;
  bool drop_last = false;
  int seg1_frames = kReferenceFrames;
  int seg2_frames = kContentFrames;
};

// One pass over the manifest in a seed-determined order. Single consumer.
class BatchIterator {
 public:
  BatchIterator(const DatasetManifest& manifest, BatchOptions options,
                uint64_t seed, std::shared_ptr<MelCache> cache);

  std::optional<SegmentBatch> Next();
  // Utterances dropped because their audio was missing or unreadable.
  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  const DatasetManifest& manifest_;
  BatchOptions options_;
  uint64_t seed_;
  std::shared_ptr<MelCache> cache_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  int64_t next_batch_id_ = 0;
  std::vector<std::string> skipped_;
};

// Deterministic 64-bit mixing of a seed with a stream index.
uint64_t MixSeed(uint64_t seed, uint64_t index);

}  // namespace singlecodec

#endif  // SINGLECODEC_DATA_MANIFEST_H_
