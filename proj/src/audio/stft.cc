// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/audio/stft.h"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "singlecodec/errors.h"

namespace singlecodec {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

int ReflectIndex(long i, int n) {
  if (n <= 1) return 0;
  const long period = 2L * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<int>(m < n ? m : period - m);
}

int CenteredFrameCount(long num_samples, int hop) {
  return static_cast<int>(num_samples / hop) + 1;
}

Stft::Stft(int fft_size, int win_length, int hop)
    : fft_size_(fft_size), win_length_(win_length), hop_(hop) {
  if (hop <= 0 || win_length < hop || fft_size < win_length) {
    throw ConfigError("Stft: need 0 < hop <= win_length <= fft_size");
  }
  window_.assign(fft_size, 0.0f);
  const int offset = (fft_size - win_length) / 2;
  for (int i = 0; i < win_length; ++i) {
    window_[offset + i] = static_cast<float>(
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win_length));
  }
  std::lock_guard<std::mutex> lock(PlannerMutex());
  time_buf_ = fftwf_alloc_real(fft_size);
  auto* freq = fftwf_alloc_complex(fft_size / 2 + 1);
  freq_buf_ = freq;
  forward_plan_ =
      fftwf_plan_dft_r2c_1d(fft_size, time_buf_, freq, FFTW_ESTIMATE);
  inverse_plan_ =
      fftwf_plan_dft_c2r_1d(fft_size, freq, time_buf_, FFTW_ESTIMATE);
}

Stft::~Stft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftwf_destroy_plan(static_cast<fftwf_plan>(forward_plan_));
  fftwf_destroy_plan(static_cast<fftwf_plan>(inverse_plan_));
  fftwf_free(time_buf_);
  fftwf_free(freq_buf_);
}

ComplexSpectrogram Stft::Forward(std::span<const float> samples) {
  const long n = static_cast<long>(samples.size());
  if (n == 0) throw InvalidInput("Stft: empty signal");
  const int frames = CenteredFrameCount(n, hop_);
  const int half = fft_size_ / 2;
  ComplexSpectrogram spec(frames, bins());
  auto* freq = static_cast<fftwf_complex*>(freq_buf_);
  for (int f = 0; f < frames; ++f) {
    const long start = static_cast<long>(f) * hop_ - half;
    for (int i = 0; i < fft_size_; ++i) {
      time_buf_[i] = samples[ReflectIndex(start + i, static_cast<int>(n))] *
                     window_[i];
    }
    fftwf_execute(static_cast<fftwf_plan>(forward_plan_));
    for (int k = 0; k < bins(); ++k) {
      spec(f, k) = std::complex<float>(freq[k][0], freq[k][1]);
    }
  }
  return spec;
}

std::vector<float> Stft::Inverse(const ComplexSpectrogram& spec,
                                 long num_samples) {
  if (spec.cols() != bins()) throw ShapeError("Stft::Inverse: bin mismatch");
  const int half = fft_size_ / 2;
  const long frames = spec.rows();
  const long padded = (frames - 1) * hop_ + fft_size_;
  std::vector<double> acc(padded, 0.0), norm(padded, 0.0);
  auto* freq = static_cast<fftwf_complex*>(freq_buf_);
  for (long f = 0; f < frames; ++f) {
    for (int k = 0; k < bins(); ++k) {
      freq[k][0] = spec(f, k).real();
      freq[k][1] = spec(f, k).imag();
    }
    fftwf_execute(static_cast<fftwf_plan>(inverse_plan_));
    const long start = f * hop_;
    for (int i = 0; i < fft_size_; ++i) {
      acc[start + i] += time_buf_[i] / fft_size_ * window_[i];
      norm[start + i] += window_[i] * window_[i];
    }
  }
  std::vector<float> out(num_samples, 0.0f);
  for (long i = 0; i < num_samples && i + half < padded; ++i) {
    const double w = norm[i + half];
    out[i] = w > 1e-8 ? static_cast<float>(acc[i + half] / w) : 0.0f;
  }
  return out;
}

}  // namespace singlecodec
