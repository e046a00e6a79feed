// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/data/synth_corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

constexpr double kPi = std::numbers::pi;

enum class PhoneKind { kVowel, kNasal, kFricative, kStop, kPause };

struct Phone {
  PhoneKind kind;
  double f1, f2, f3;       // vowel / nasal formants
  double noise_center;     // fricatives and bursts
  double noise_bandwidth;
};

constexpr std::array<Phone, 15> kInventory = {{
    {PhoneKind::kVowel, 730, 1090, 2440, 0, 0},    // a
    {PhoneKind::kVowel, 270, 2290, 3010, 0, 0},    // i
    {PhoneKind::kVowel, 300, 870, 2240, 0, 0},     // u
    {PhoneKind::kVowel, 530, 1840, 2480, 0, 0},    // e
    {PhoneKind::kVowel, 570, 840, 2410, 0, 0},     // o
    {PhoneKind::kVowel, 660, 1720, 2410, 0, 0},    // ae
    {PhoneKind::kVowel, 490, 1350, 1690, 0, 0},    // er
    {PhoneKind::kVowel, 440, 1020, 2240, 0, 0},    // uh
    {PhoneKind::kNasal, 250, 1100, 2300, 0, 0},    // m
    {PhoneKind::kNasal, 250, 1700, 2500, 0, 0},    // n
    {PhoneKind::kFricative, 0, 0, 0, 6500, 2500},  // s
    {PhoneKind::kFricative, 0, 0, 0, 3200, 1500},  // sh
    {PhoneKind::kFricative, 0, 0, 0, 5000, 6000},  // f
    {PhoneKind::kStop, 0, 0, 0, 1800, 1200},       // k-ish
    {PhoneKind::kStop, 0, 0, 0, 4000, 2500},       // t-ish
}};

// Two-pole resonator in Klatt form.
class Resonator {
 public:
  void Set(double freq, double bandwidth, double rate) {
    const double t = 1.0 / rate;
    c_ = -std::exp(-2.0 * kPi * bandwidth * t);
    b_ = 2.0 * std::exp(-kPi * bandwidth * t) * std::cos(2.0 * kPi * freq * t);
    a_ = 1.0 - b_ - c_;
  }
  double Process(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_ = 1, b_ = 0, c_ = 0, y1_ = 0, y2_ = 0;
};

// Rosenberg glottal pulse over one period, phase in [0, 1).
double GlottalPulse(double phase) {
  if (phase < 0.4) return 0.5 * (1.0 - std::cos(kPi * phase / 0.4));
  if (phase < 0.56) return std::cos(kPi * (phase - 0.4) / 0.32);
  return 0.0;
}

struct Targets {
  double f1 = 500, f2 = 1500, f3 = 2500;
  double voice = 0.0, noise = 0.0;
  double noise_center = 4000, noise_bandwidth = 2000;
};

}  // namespace

AudioClip SynthesizeUtterance(double seconds, const SynthCorpusOptions& options,
                              std::mt19937_64& rng) {
  const double rate = options.sample_rate;
  const auto total = static_cast<size_t>(seconds * rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Phone sequence with per-phone durations in samples.
  std::vector<std::pair<Targets, size_t>> plan;
  const size_t lead = static_cast<size_t>((0.1 + 0.1 * unit(rng)) * rate);
  plan.push_back({Targets{}, lead});
  size_t planned = lead;
  int since_pause = 0;
  while (planned < total) {
    Targets tg;
    size_t len;
    const bool pause = since_pause > 6 && unit(rng) < 0.15;
    if (pause) {
      len = static_cast<size_t>((0.12 + 0.2 * unit(rng)) * rate);
      since_pause = 0;
    } else {
      // Vowels dominate, as in running speech.
      const size_t idx = unit(rng) < 0.55
                             ? static_cast<size_t>(unit(rng) * 8)
                             : 8 + static_cast<size_t>(unit(rng) * 7);
      const Phone& p = kInventory[std::min<size_t>(idx, kInventory.size() - 1)];
      tg.f1 = p.f1;
      tg.f2 = p.f2;
      tg.f3 = p.f3;
      tg.noise_center = p.noise_center;
      tg.noise_bandwidth = p.noise_bandwidth;
      switch (p.kind) {
        case PhoneKind::kVowel:
          tg.voice = 0.8 + 0.4 * unit(rng);
          len = static_cast<size_t>((0.08 + 0.14 * unit(rng)) * rate);
          break;
        case PhoneKind::kNasal:
          tg.voice = 0.35;
          len = static_cast<size_t>((0.05 + 0.06 * unit(rng)) * rate);
          break;
        case PhoneKind::kFricative:
          tg.noise = 0.25 + 0.15 * unit(rng);
          len = static_cast<size_t>((0.07 + 0.08 * unit(rng)) * rate);
          break;
        case PhoneKind::kStop:
        case PhoneKind::kPause:
          tg.noise = 0.5;
          len = static_cast<size_t>((0.03 + 0.02 * unit(rng)) * rate);
          break;
      }
      ++since_pause;
    }
    plan.push_back({tg, len});
    planned += len;
  }

  AudioClip clip;
  clip.sample_rate = options.sample_rate;
  clip.samples.resize(total);
  std::array<Resonator, 5> cascade;
  Resonator noise_filter;
  const double smooth = 1.0 - std::exp(-1.0 / (0.012 * rate));  // ~12 ms glide
  const double amp_smooth = 1.0 - std::exp(-1.0 / (0.006 * rate));
  Targets cur = plan.front().first;
  double phase = 0.0, prev_pulse = 0.0;
  const double vibrato_rate = 4.0 + unit(rng);
  size_t n = 0;
  for (const auto& [tg, len] : plan) {
    for (size_t i = 0; i < len && n < total; ++i, ++n) {
      cur.f1 += smooth * (tg.f1 - cur.f1);
      cur.f2 += smooth * (tg.f2 - cur.f2);
      cur.f3 += smooth * (tg.f3 - cur.f3);
      cur.noise_center += smooth * (tg.noise_center - cur.noise_center);
      cur.noise_bandwidth += smooth * (tg.noise_bandwidth - cur.noise_bandwidth);
      cur.voice += amp_smooth * (tg.voice - cur.voice);
      cur.noise += amp_smooth * (tg.noise - cur.noise);
      if ((n & 31) == 0) {
        cascade[0].Set(cur.f1, 60, rate);
        cascade[1].Set(cur.f2, 90, rate);
        cascade[2].Set(cur.f3, 130, rate);
        cascade[3].Set(3500, 220, rate);
        cascade[4].Set(4500, 280, rate);
        noise_filter.Set(cur.noise_center, cur.noise_bandwidth, rate);
      }
      const double t = static_cast<double>(n) / rate;
      const double f0 = options.base_f0 * (1.15 - 0.3 * t / seconds) *
                        (1.0 + 0.03 * std::sin(2.0 * kPi * vibrato_rate * t));
      phase += f0 / rate;
      if (phase >= 1.0) phase -= 1.0;
      const double pulse = GlottalPulse(phase);
      double voiced = (pulse - prev_pulse) * cur.voice + 0.002 * gauss(rng);
      prev_pulse = pulse;
      for (Resonator& r : cascade) voiced = r.Process(voiced);
      const double noise = noise_filter.Process(gauss(rng)) * cur.noise;
      clip.samples[n] = static_cast<float>(voiced * 0.05 + noise * 0.08);
    }
  }

  float peak = 1e-6f;
  for (float s : clip.samples) peak = std::max(peak, std::abs(s));
  for (float& s : clip.samples) s *= 0.5f / peak;
  return clip;
}

DatasetManifest SynthesizeCorpus(const std::filesystem::path& dir,
                                 const SynthCorpusOptions& options) {
  if (options.min_utterance_seconds <= 0.0 ||
      options.max_utterance_seconds < options.min_utterance_seconds) {
    throw ConfigError("SynthesizeCorpus: bad utterance length range");
  }
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> length(options.min_utterance_seconds,
                                                options.max_utterance_seconds);
  DatasetManifest manifest;
  double produced = 0.0;
  int index = 0;
  while (produced < options.total_seconds) {
    const double seconds =
        std::min(length(rng),
                 std::max(options.min_utterance_seconds,
                          options.total_seconds - produced));
    AudioClip clip = SynthesizeUtterance(seconds, options, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "utt_%04d", index++);
    const auto path = dir / (std::string(name) + ".wav");
    WriteWav(path, clip);
    manifest.entries.push_back(
        {name, path, clip.duration_seconds(), options.speaker_id});
    produced += clip.duration_seconds();
  }
  WriteManifest(dir / "manifest.tsv", manifest);
  return manifest;
}

}  // namespace singlecodec
