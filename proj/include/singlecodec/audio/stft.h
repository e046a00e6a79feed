// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_AUDIO_STFT_H_
#define SINGLECODEC_AUDIO_STFT_H_

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace singlecodec {

using ComplexSpectrogram =
    Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic,
                  Eigen::RowMajor>;

// Reflection index for any integer i into [0, n): ... 2 1 | 0 1 2 ... n-1 |
// n-2 ... (edge samples are not repeated). n == 1 maps everything to 0.
int ReflectIndex(long i, int n);

// Number of frames produced by a centered STFT: floor(samples / hop) + 1.
int CenteredFrameCount(long num_samples, int hop);

// Centered short-time Fourier transform with a periodic Hann window. The
// signal is reflection-padded by fft_size / 2 on both sides. An instance
// owns FFTW plans and scratch buffers: use one per thread.
class Stft {
 public:
  Stft(int fft_size, int win_length, int hop);
  ~Stft();
  Stft(const Stft&) = delete;
  Stft& operator=(const Stft&) = delete;

  int fft_size() const { return fft_size_; }
  int hop() const { return hop_; }
  int bins() const { return fft_size_ / 2 + 1; }

  // [frames x bins]
  ComplexSpectrogram Forward(std::span<const float> samples);
  // Weighted overlap-add inverse; `num_samples` trims the centered padding.
  std::vector<float> Inverse(const ComplexSpectrogram& spec, long num_samples);

 private:
  int fft_size_, win_length_, hop_;
  std::vector<float> window_;  // length fft_size, zero outside the window
  float* time_buf_;
  void* freq_buf_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace singlecodec

#endif  // SINGLECODEC_AUDIO_STFT_H_
