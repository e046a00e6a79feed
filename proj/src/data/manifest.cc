// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/data/manifest.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

nn::Matrix Stack(const std::vector<SegmentPair>& pairs, bool first) {
  if (pairs.empty()) return nn::Matrix();
  const auto& proto = first ? pairs[0].seg1.values : pairs[0].seg2.values;
  nn::Matrix out(proto.rows() * static_cast<Eigen::Index>(pairs.size()),
                 proto.cols());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& m = first ? pairs[i].seg1.values : pairs[i].seg2.values;
    out.middleRows(static_cast<Eigen::Index>(i) * proto.rows(), proto.rows()) = m;
  }
  return out;
}

}  // namespace

uint64_t MixSeed(uint64_t seed, uint64_t index) {
  // splitmix64 finaliser over the combined value.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DatasetManifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  DatasetManifest manifest;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
    const auto fields = SplitTabs(line);
    if (fields.size() != 4) {
      throw ParseError(where() + "expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    ManifestEntry entry;
    entry.utterance_id = fields[0];
    if (entry.utterance_id.empty()) throw ParseError(where() + "empty utterance id");
    if (!seen.insert(entry.utterance_id).second) {
      throw ParseError(where() + "duplicate utterance id '" + entry.utterance_id + "'");
    }
    entry.audio_path = fields[1];
    if (entry.audio_path.is_relative()) entry.audio_path = base / entry.audio_path;
    const char* begin = fields[2].data();
    const char* end = begin + fields[2].size();
    auto [ptr, ec] = std::from_chars(begin, end, entry.duration_seconds);
    if (ec != std::errc() || ptr != end || entry.duration_seconds < 0.0) {
      throw ParseError(where() + "bad duration '" + fields[2] + "'");
    }
    entry.speaker_id = fields[3];
    if (!std::filesystem::exists(entry.audio_path)) {
      manifest.missing.push_back(manifest.entries.size());
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  for (const ManifestEntry& e : manifest.entries) {
    std::filesystem::path p = e.audio_path;
    if (!base.empty() && p.is_absolute() == base.is_absolute()) {
      const auto rel = p.lexically_normal().lexically_relative(base.lexically_normal());
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    std::ostringstream duration;
    duration.precision(6);
    duration << std::fixed << e.duration_seconds;
    out << e.utterance_id << '\t' << p.string() << '\t' << duration.str() << '\t'
        << e.speaker_id << '\n';
  }
}

MelSpectrogram LoadMel(const ManifestEntry& entry, const MelConfig& config) {
  AudioClip clip = ReadWav(entry.audio_path);
  if (clip.sample_rate != config.sample_rate) {
    clip = Resample(clip, config.sample_rate);
  }
  return ComputeMel(clip, config);
}

const MelSpectrogram& MelCache::Get(const ManifestEntry& entry) {
  auto it = mels_.find(entry.utterance_id);
  if (it != mels_.end()) return it->second;
  return mels_.emplace(entry.utterance_id, LoadMel(entry, config_)).first->second;
}

nn::Matrix SegmentBatch::StackSeg1() const { return Stack(pairs, true); }
nn::Matrix SegmentBatch::StackSeg2() const { return Stack(pairs, false); }

BatchIterator::BatchIterator(const DatasetManifest& manifest,
                             BatchOptions options, uint64_t seed,
                             std::shared_ptr<MelCache> cache)
    : manifest_(manifest),
      options_(options),
      seed_(seed),
      cache_(cache ? std::move(cache) : std::make_shared<MelCache>(MelConfig{})) {
  if (options_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::set<size_t> missing(manifest.missing.begin(), manifest.missing.end());
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    if (missing.count(i)) {
      skipped_.push_back(manifest.entries[i].utterance_id);
    } else {
      order_.push_back(i);
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order_.begin(), order_.end(), rng);
}

std::optional<SegmentBatch> BatchIterator::Next() {
  SegmentBatch batch;
  while (cursor_ < order_.size() && batch.size() < options_.batch_size) {
    const size_t position = cursor_++;
    const ManifestEntry& entry = manifest_.entries[order_[position]];
    const MelSpectrogram* mel = nullptr;
    try {
      mel = &cache_->Get(entry);
    } catch (const Error&) {
      skipped_.push_back(entry.utterance_id);
      continue;
    }
    batch.utterance_ids.push_back(entry.utterance_id);
    batch.pairs.push_back(SampleSegments(*mel, MixSeed(seed_, position),
                                         options_.seg1_frames,
                                         options_.seg2_frames));
  }
  if (batch.size() == 0) return std::nullopt;
  if (options_.drop_last && batch.size() < options_.batch_size) return std::nullopt;
  batch.batch_id = next_batch_id_++;
  return batch;
}

}  // namespace singlecodec
