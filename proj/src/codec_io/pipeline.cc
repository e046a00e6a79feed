// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/codec_io/pipeline.h"

#include <fmt/format.h>

#include "singlecodec/data/segments.h"
#include "singlecodec/errors.h"
#include "singlecodec/eval/metrics.h"

namespace singlecodec {

using nn::Matrix;
using nn::Tensor;

namespace {

Tensor RepeatRows(const Matrix& row, int times) {
  return Tensor(row.replicate(times, 1).eval());
}

}  // namespace

int ChunkCount(int frames, int chunk_frames) {
  if (frames < 1) throw InvalidInput("cannot chunk an empty mel spectrogram");
  return (frames + chunk_frames - 1) / chunk_frames;
}

TokenStream EncodeUtterance(const SingleCodec& model, const nn::Matrix& mel) {
  const ModelConfig& cfg = model.config();
  if (mel.cols() != cfg.n_mels()) {
    throw ShapeError(fmt::format("encode: mel has {} bins, model expects {}", mel.cols(),
                                 cfg.n_mels()));
  }
  const int frames = static_cast<int>(mel.rows());
  const int chunk = cfg.seg2_frames;
  const int n = ChunkCount(frames, chunk);
  if (n * chunk - frames > 0xffff) throw InvalidInput("chunk padding exceeds u16");
  nn::NoGradGuard no_grad;
  Matrix stacked(static_cast<Eigen::Index>(n) * chunk, mel.cols());
  for (int i = 0; i < n; ++i) {
    stacked.middleRows(static_cast<Eigen::Index>(i) * chunk, chunk) =
        SliceFramesReflect(mel, i * chunk, chunk);
  }
  TokenStream s;
  s.sample_rate = static_cast<uint32_t>(cfg.mel.sample_rate);
  s.hop = static_cast<uint16_t>(cfg.mel.hop_length);
  s.downsample_factor = static_cast<uint8_t>(cfg.downsample_factor);
  s.codebook_bits = static_cast<uint8_t>(CodeBits(cfg.quantizer.codebook_size));
  s.pad_frames = static_cast<uint16_t>(n * chunk - frames);
  Tensor g;
  if (model.has_reference()) {
    Tensor whole = model.ReferenceEmbedding(Tensor(mel), 1, false);
    s.embedding.assign(whole.value().data(), whole.value().data() + whole.value().size());
    g = RepeatRows(whole.value(), n);
  }
  const Tensor latent = model.Encode(Tensor(stacked), g, n).latent;
  const QuantizationResult q = model.quantizer().Quantize(latent.value());
  s.codes.assign(q.codes.begin(), q.codes.end());
  return s;
}

nn::Matrix DecodeTokens(const SingleCodec& model, const TokenStream& s) {
  const ModelConfig& cfg = model.config();
  auto mismatch = [](const std::string& what, int64_t got, int64_t want) {
    throw ConfigMismatch(fmt::format("token stream {} is {}, checkpoint expects {}", what, got,
                                     want));
  };
  if (s.sample_rate != static_cast<uint32_t>(cfg.mel.sample_rate)) {
    mismatch("sample_rate", s.sample_rate, cfg.mel.sample_rate);
  }
  if (s.hop != cfg.mel.hop_length) mismatch("hop", s.hop, cfg.mel.hop_length);
  if (s.downsample_factor != cfg.downsample_factor) {
    mismatch("downsample_factor", s.downsample_factor, cfg.downsample_factor);
  }
  if (s.codebook_bits != CodeBits(cfg.quantizer.codebook_size)) {
    mismatch("codebook_bits", s.codebook_bits, CodeBits(cfg.quantizer.codebook_size));
  }
  const int expected_dim = model.has_reference() ? cfg.model_dim : 0;
  if (static_cast<int>(s.embedding.size()) != expected_dim) {
    mismatch("embed_dim", static_cast<int64_t>(s.embedding.size()), expected_dim);
  }
  const int per_chunk = cfg.latent_frames();
  if (s.codes.empty() || s.codes.size() % per_chunk != 0) {
    throw FormatError(fmt::format("token stream holds {} tokens, not a positive multiple of {}",
                                  s.codes.size(), per_chunk));
  }
  const int n = static_cast<int>(s.codes.size() / per_chunk);
  const int total = n * cfg.seg2_frames;
  if (s.pad_frames >= cfg.seg2_frames) {
    throw FormatError(fmt::format("pad of {} frames exceeds one chunk", s.pad_frames));
  }
  std::vector<int> codes;
  codes.reserve(s.codes.size());
  for (uint32_t c : s.codes) {
    if (c >= static_cast<uint32_t>(cfg.quantizer.codebook_size)) {
      throw InvalidInput(fmt::format("code {} outside the codebook", c));
    }
    codes.push_back(static_cast<int>(c));
  }
  nn::NoGradGuard no_grad;
  Tensor g;
  if (model.has_reference()) {
    Matrix row = Eigen::Map<const Matrix>(s.embedding.data(), 1, expected_dim);
    g = RepeatRows(row, n);
  }
  const Tensor mel = model.Decode(Tensor(model.LookupCodes(codes)), g, n);
  return mel.value().topRows(total - s.pad_frames);
}

}  // namespace singlecodec
