// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/model/config.h"

#include <string>

#include "singlecodec/errors.h"

namespace singlecodec {

using nlohmann::json;

namespace {

bool IsPowerOfTwo(int v) { return v > 0 && (v & (v - 1)) == 0; }

template <typename T>
void Get(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void ModelConfig::Validate() const {
  mel.Validate();
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (model_dim < 1 || conformer_dim < 1 || blstm_hidden < 1 || ref_gru_hidden < 1) {
    fail("all dims must be >= 1");
  }
  if (!IsPowerOfTwo(downsample_factor)) fail("downsample_factor must be a power of two");
  int stages = 0;
  for (int f = downsample_factor; f > 1; f /= 2) ++stages;
  if (static_cast<int>(conv_hidden_dims.size()) != stages + 1) {
    fail("conv_hidden_dims needs log2(downsample_factor) + 1 entries");
  }
  for (int d : conv_hidden_dims) {
    if (d < 1) fail("conv_hidden_dims entries must be >= 1");
  }
  if (seg2_frames < 1 || seg2_frames % downsample_factor != 0) {
    fail("downsample_factor must divide seg2_frames");
  }
  if (resample_factor < 1 || (resample_factor % 2 != 0 && resample_factor != 1)) {
    fail("resample_factor must be 1 or even");
  }
  if (flags.use_resampling && latent_frames() % resample_factor != 0) {
    fail("resample_factor must divide the latent length");
  }
  if (conformer_layers < 0 || conformer_heads < 1 || conformer_dim % conformer_heads != 0) {
    fail("conformer_dim must be divisible by conformer_heads");
  }
  if (conformer_kernel < 1 || conformer_kernel % 2 == 0) fail("conformer_kernel must be odd");
  if (blstm_layers < 1) fail("blstm_layers must be >= 1");
  if (ref_conv_layers < 1 || static_cast<int>(ref_conv_channels.size()) != ref_conv_layers) {
    fail("ref_conv_channels must have ref_conv_layers entries");
  }
  if (ref_conv_kernel < 1 || ref_conv_kernel % 2 == 0) fail("ref_conv_kernel must be odd");
  if (flags.ref_segment_len < 1) fail("ref_segment_len must be >= 1");
  quantizer.Validate();
  if (quantizer.dim != model_dim) fail("quantizer.dim must equal model_dim");
}

ModelConfig ModelConfig::Desk() {
  ModelConfig c;
  c.model_dim = 64;
  c.conv_hidden_dims = {64, 96, 128};
  c.conformer_dim = 128;
  c.conformer_layers = 2;
  c.conformer_heads = 4;
  c.conformer_ffn_mult = 2;
  c.blstm_hidden = 64;
  c.ref_conv_channels = {16, 16, 32, 32, 64, 64};
  c.ref_gru_hidden = 64;
  c.quantizer.dim = c.model_dim;
  return c;
}

void to_json(json& j, const VariantFlags& f) {
  j = json{{"use_reference", f.use_reference},
           {"ref_segment_len", f.ref_segment_len},
           {"use_blstm", f.use_blstm},
           {"use_hybrid_sampling", f.use_hybrid_sampling},
           {"use_conformer", f.use_conformer},
           {"use_resampling", f.use_resampling},
           {"subtract_g_per_block", f.subtract_g_per_block}};
}

void from_json(const json& j, VariantFlags& f) {
  Get(j, "use_reference", f.use_reference);
  Get(j, "ref_segment_len", f.ref_segment_len);
  Get(j, "use_blstm", f.use_blstm);
  Get(j, "use_hybrid_sampling", f.use_hybrid_sampling);
  Get(j, "use_conformer", f.use_conformer);
  Get(j, "use_resampling", f.use_resampling);
  Get(j, "subtract_g_per_block", f.subtract_g_per_block);
}

void to_json(json& j, const ModelConfig& c) {
  j = json{
      {"variant", c.variant},
      {"mel",
       {{"sample_rate", c.mel.sample_rate},
        {"hop_length", c.mel.hop_length},
        {"win_length", c.mel.win_length},
        {"fft_size", c.mel.fft_size},
        {"n_mels", c.mel.n_mels},
        {"fmin", c.mel.fmin},
        {"fmax", c.mel.fmax},
        {"log_floor", c.mel.log_floor}}},
      {"model_dim", c.model_dim},
      {"conv_hidden_dims", c.conv_hidden_dims},
      {"conformer_dim", c.conformer_dim},
      {"conformer_layers", c.conformer_layers},
      {"conformer_heads", c.conformer_heads},
      {"conformer_kernel", c.conformer_kernel},
      {"conformer_ffn_mult", c.conformer_ffn_mult},
      {"downsample_factor", c.downsample_factor},
      {"blstm_hidden", c.blstm_hidden},
      {"blstm_layers", c.blstm_layers},
      {"ref_conv_layers", c.ref_conv_layers},
      {"ref_conv_kernel", c.ref_conv_kernel},
      {"ref_conv_channels", c.ref_conv_channels},
      {"ref_gru_hidden", c.ref_gru_hidden},
      {"resample_factor", c.resample_factor},
      {"seg2_frames", c.seg2_frames},
      {"quantizer",
       {{"codebook_size", c.quantizer.codebook_size},
        {"dim", c.quantizer.dim},
        {"decay", c.quantizer.decay},
        {"epsilon", c.quantizer.epsilon},
        {"commitment_weight", c.quantizer.commitment_weight},
        {"reseed_dead_codes", c.quantizer.reseed_dead_codes},
        {"dead_code_steps", c.quantizer.dead_code_steps}}},
      {"flags", c.flags}};
}

void from_json(const json& j, ModelConfig& c) {
  Get(j, "variant", c.variant);
  if (j.contains("mel")) {
    const json& m = j.at("mel");
    Get(m, "sample_rate", c.mel.sample_rate);
    Get(m, "hop_length", c.mel.hop_length);
    Get(m, "win_length", c.mel.win_length);
    Get(m, "fft_size", c.mel.fft_size);
    Get(m, "n_mels", c.mel.n_mels);
    Get(m, "fmin", c.mel.fmin);
    Get(m, "fmax", c.mel.fmax);
    Get(m, "log_floor", c.mel.log_floor);
  }
  Get(j, "model_dim", c.model_dim);
  Get(j, "conv_hidden_dims", c.conv_hidden_dims);
  Get(j, "conformer_dim", c.conformer_dim);
  Get(j, "conformer_layers", c.conformer_layers);
  Get(j, "conformer_heads", c.conformer_heads);
  Get(j, "conformer_kernel", c.conformer_kernel);
  Get(j, "conformer_ffn_mult", c.conformer_ffn_mult);
  Get(j, "downsample_factor", c.downsample_factor);
  Get(j, "blstm_hidden", c.blstm_hidden);
  Get(j, "blstm_layers", c.blstm_layers);
  Get(j, "ref_conv_layers", c.ref_conv_layers);
  Get(j, "ref_conv_kernel", c.ref_conv_kernel);
  Get(j, "ref_conv_channels", c.ref_conv_channels);
  Get(j, "ref_gru_hidden", c.ref_gru_hidden);
  Get(j, "resample_factor", c.resample_factor);
  Get(j, "seg2_frames", c.seg2_frames);
  if (j.contains("quantizer")) {
    const json& q = j.at("quantizer");
    Get(q, "codebook_size", c.quantizer.codebook_size);
    Get(q, "dim", c.quantizer.dim);
    Get(q, "decay", c.quantizer.decay);
    Get(q, "epsilon", c.quantizer.epsilon);
    Get(q, "commitment_weight", c.quantizer.commitment_weight);
    Get(q, "reseed_dead_codes", c.quantizer.reseed_dead_codes);
    Get(q, "dead_code_steps", c.quantizer.dead_code_steps);
  }
  Get(j, "flags", c.flags);
}

const std::vector<std::string>& VariantNames() {
  static const std::vector<std::string> names = {
      "VQVAE",          "Ref-short",        "Ref-long",
      "Ref-BLSTM",      "Ref-HybSam",       "Ref-BLSTM-HybSam",
      "Ref-BLSTM-HybSam-Conf", "Single-Codec"};
  return names;
}

VariantFlags VariantFlagsFor(const std::string& name) {
  VariantFlags f;
  f.use_reference = false;
  f.use_blstm = false;
  f.use_hybrid_sampling = false;
  f.use_conformer = false;
  f.use_resampling = false;
  f.ref_segment_len = 600;
  if (name == "VQVAE") return f;
  f.use_reference = true;
  if (name == "Ref-short") {
    f.ref_segment_len = 200;
    return f;
  }
  if (name == "Ref-long") return f;
  if (name == "Ref-BLSTM") {
    f.use_blstm = true;
    return f;
  }
  if (name == "Ref-HybSam") {
    f.use_hybrid_sampling = true;
    return f;
  }
  f.use_blstm = true;
  f.use_hybrid_sampling = true;
  if (name == "Ref-BLSTM-HybSam") return f;
  f.use_conformer = true;
  if (name == "Ref-BLSTM-HybSam-Conf") return f;
  f.use_resampling = true;
  if (name == "Single-Codec") return f;

  std::string valid;
  for (const std::string& n : VariantNames()) {
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw ConfigError("unknown variant '" + name + "'; valid variants: " + valid);
}

ModelConfig BuildVariant(const std::string& name, ModelConfig base) {
  base.flags = VariantFlagsFor(name);
  base.variant = name;
  return base;
}

}  // namespace singlecodec
