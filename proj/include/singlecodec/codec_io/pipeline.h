// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_CODEC_IO_PIPELINE_H_
#define SINGLECODEC_CODEC_IO_PIPELINE_H_

#include "singlecodec/codec_io/bitstream.h"
#include "singlecodec/model/codec.h"

namespace singlecodec {

// Number of seg2-sized chunks covering `frames`: ceil(frames / seg2_frames).
int ChunkCount(int frames, int chunk_frames);

// Splits the utterance into seg2-sized chunks (the last reflection-padded),
// codes them with one global embedding computed from the whole utterance and
// records the padding so decoding can trim it.
TokenStream EncodeUtterance(const SingleCodec& model, const nn::Matrix& mel);

// Inverse of EncodeUtterance up to quantization. Throws ConfigMismatch when
// the stream header does not match the model.
nn::Matrix DecodeTokens(const SingleCodec& model, const TokenStream& stream);

}  // namespace singlecodec

#endif  // SINGLECODEC_CODEC_IO_PIPELINE_H_
