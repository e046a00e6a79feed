// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/audio/mel.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "singlecodec/audio/stft.h"
#include "singlecodec/errors.h"

namespace singlecodec {

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
constexpr double kLinearStep = 200.0 / 3.0;
constexpr double kLogStartHz = 1000.0;
constexpr double kLogStartMel = kLogStartHz / kLinearStep;
const double kLogStep = std::log(6.4) / 27.0;

double HzToMel(double hz) {
  if (hz < kLogStartHz) return hz / kLinearStep;
  return kLogStartMel + std::log(hz / kLogStartHz) / kLogStep;
}

double MelToHz(double mel) {
  if (mel < kLogStartMel) return mel * kLinearStep;
  return kLogStartHz * std::exp(kLogStep * (mel - kLogStartMel));
}

}  // namespace

void MelConfig::Validate() const {
  if (sample_rate <= 0) throw ConfigError("MelConfig: sample_rate must be > 0");
  if (hop_length <= 0 || hop_length > win_length || win_length > fft_size) {
    throw ConfigError("MelConfig: need 0 < hop_length <= win_length <= fft_size");
  }
  if (n_mels < 1) throw ConfigError("MelConfig: n_mels must be >= 1");
  if (!(log_floor > 0.0f)) throw ConfigError("MelConfig: log_floor must be > 0");
  if (fmin < 0.0f || fmax <= fmin || fmax > sample_rate / 2.0f) {
    throw ConfigError("MelConfig: need 0 <= fmin < fmax <= sample_rate / 2");
  }
}

float MelConfig::silence_value() const { return std::log(log_floor); }

nn::Matrix MelFilterbank(const MelConfig& cfg) {
  cfg.Validate();
  const int bins = cfg.fft_size / 2 + 1;
  const double mel_lo = HzToMel(cfg.fmin);
  const double mel_hi = HzToMel(cfg.fmax);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }
  nn::Matrix fb = nn::Matrix::Zero(bins, cfg.n_mels);
  for (int k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
    for (int m = 0; m < cfg.n_mels; ++m) {
      const double lower = (f - edges[m]) / (edges[m + 1] - edges[m]);
      const double upper = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      const double w = std::max(0.0, std::min(lower, upper));
      fb(k, m) = static_cast<float>(w * 2.0 / (edges[m + 2] - edges[m]));
    }
  }
  return fb;
}

MelSpectrogram ComputeMel(const AudioClip& clip, const MelConfig& cfg) {
  cfg.Validate();
  if (clip.samples.empty()) throw InvalidInput("ComputeMel: empty clip");
  if (clip.sample_rate != cfg.sample_rate) {
    throw ConfigMismatch("ComputeMel: clip sample rate " +
                         std::to_string(clip.sample_rate) +
                         " != configured " + std::to_string(cfg.sample_rate));
  }
  Stft stft(cfg.fft_size, cfg.win_length, cfg.hop_length);
  ComplexSpectrogram spec = stft.Forward(clip.samples);
  nn::Matrix magnitude = spec.cwiseAbs();
  MelSpectrogram mel;
  mel.config = cfg;
  mel.values = (magnitude * MelFilterbank(cfg))
                   .unaryExpr([floor = cfg.log_floor](float v) {
                     return std::log(std::max(v, floor));
                   });
  return mel;
}

}  // namespace singlecodec
