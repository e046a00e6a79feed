// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_MODEL_CONFIG_H_
#define SINGLECODEC_MODEL_CONFIG_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "singlecodec/audio/mel.h"
#include "singlecodec/quant/quantizer.h"

namespace singlecodec {

struct VariantFlags {
  bool use_reference = true;
  int ref_segment_len = 600;
  bool use_blstm = true;
  bool use_hybrid_sampling = true;
  bool use_conformer = true;
  bool use_resampling = true;
  // Subtract a projection of g after every encoder stage instead of once
  // after the Conformer stack.
  bool subtract_g_per_block = false;

  bool operator==(const VariantFlags&) const = default;
};

struct ModelConfig {
  std::string variant = "Single-Codec";
  MelConfig mel;
  int model_dim = 256;
  std::vector<int> conv_hidden_dims = {256, 512, 1024};
  int conformer_dim = 1024;
  int conformer_layers = 4;
  int conformer_heads = 8;
  int conformer_kernel = 15;
  int conformer_ffn_mult = 4;
  int downsample_factor = 4;
  int blstm_hidden = 128;
  int blstm_layers = 2;
  int ref_conv_layers = 6;
  int ref_conv_kernel = 3;
  std::vector<int> ref_conv_channels = {32, 32, 64, 64, 128, 128};
  int ref_gru_hidden = 128;
  int resample_factor = 2;
  int seg2_frames = 200;
  QuantizerConfig quantizer;
  VariantFlags flags;

  // Throws ConfigError with the first violated constraint.
  void Validate() const;
  int latent_frames() const { return seg2_frames / downsample_factor; }
  int n_mels() const { return mel.n_mels; }

  // Reduced widths for single-CPU training; codebook size unchanged.
  static ModelConfig Desk();
};

void to_json(nlohmann::json& j, const VariantFlags& f);
void from_json(const nlohmann::json& j, VariantFlags& f);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// The eight architectures of the ablation study, in table order.
const std::vector<std::string>& VariantNames();

// Flags for a named variant. Throws ConfigError listing the valid names.
VariantFlags VariantFlagsFor(const std::string& name);

// `base` with its flags replaced by those of `name`.
ModelConfig BuildVariant(const std::string& name, ModelConfig base = {});

}  // namespace singlecodec

#endif  // SINGLECODEC_MODEL_CONFIG_H_
