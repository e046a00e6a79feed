// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/audio/griffin_lim.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "singlecodec/audio/stft.h"
#include "singlecodec/errors.h"

namespace singlecodec {

nn::Matrix MelToMagnitude(const nn::Matrix& log_mel, const MelConfig& cfg) {
  cfg.Validate();
  if (log_mel.cols() != cfg.n_mels) {
    throw ShapeError("mel has " + std::to_string(log_mel.cols()) + " bins, config expects " +
                     std::to_string(cfg.n_mels));
  }
  const Eigen::MatrixXd fb = MelFilterbank(cfg).cast<double>();
  const Eigen::MatrixXd pinv = fb.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd mag = log_mel.cast<double>().array().exp().matrix() * pinv;
  return mag.cwiseMax(0.0).cast<float>();
}

AudioClip GriffinLim(const nn::Matrix& magnitude, const MelConfig& cfg, int iterations,
                     uint64_t seed) {
  cfg.Validate();
  if (iterations < 1) throw ConfigError("griffin-lim needs at least one iteration");
  Stft stft(cfg.fft_size, cfg.win_length, cfg.hop_length);
  if (magnitude.cols() != stft.bins() || magnitude.rows() < 1) {
    throw ShapeError("magnitude must be [frames x " + std::to_string(stft.bins()) + "]");
  }
  const long samples = static_cast<long>(magnitude.rows() - 1) * cfg.hop_length;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> angle(0.0f, 2.0f * std::numbers::pi_v<float>);
  ComplexSpectrogram spec(magnitude.rows(), magnitude.cols());
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    spec.data()[i] = std::polar(magnitude.data()[i], angle(rng));
  }
  std::vector<float> wave;
  for (int it = 0; it < iterations; ++it) {
    wave = stft.Inverse(spec, samples);
    if (it + 1 == iterations) break;
    ComplexSpectrogram est = stft.Forward(wave);
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      const float a = std::abs(est.data()[i]);
      const std::complex<float> phase = a > 0.0f ? est.data()[i] / a : std::complex<float>(1.0f);
      spec.data()[i] = magnitude.data()[i] * phase;
    }
  }
  AudioClip clip;
  clip.samples = std::move(wave);
  clip.sample_rate = cfg.sample_rate;
  return clip;
}

AudioClip MelToAudio(const nn::Matrix& log_mel, const MelConfig& cfg, int iterations,
                     uint64_t seed) {
  return GriffinLim(MelToMagnitude(log_mel, cfg), cfg, iterations, seed);
}

}  // namespace singlecodec
