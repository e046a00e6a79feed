// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "singlecodec/errors.h"

namespace singlecodec {

using nn::Matrix;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'C', 'K', 'P'};

void PutU32(std::string& out, uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), 4);
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  void Need(size_t n, const char* what) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(std::string("checkpoint truncated reading ") + what +
                        " at byte " + std::to_string(pos_));
    }
  }
  uint32_t U32(const char* what) {
    Need(4, what);
    uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string Bytes(size_t n, const char* what) {
    Need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void Floats(float* dst, size_t n, const char* what) {
    Need(n * 4, what);
    std::memcpy(dst, bytes_.data() + pos_, n * 4);
    pos_ += n * 4;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  size_t pos_ = 0;
};

}  // namespace

void WriteCheckpoint(const std::filesystem::path& path, const CheckpointData& data) {
  std::string out(kMagic, 4);
  PutU32(out, data.version);
  const std::string meta = data.meta.dump();
  PutU32(out, static_cast<uint32_t>(meta.size()));
  out += meta;
  PutU32(out, static_cast<uint32_t>(data.arrays.size()));
  for (const auto& [name, m] : data.arrays) {
    PutU32(out, static_cast<uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<uint32_t>(m.rows()));
    PutU32(out, static_cast<uint32_t>(m.cols()));
    out.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(float));
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write checkpoint " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::stringstream buffer;
  buffer << f.rdbuf();
  Reader r(buffer.str());
  if (r.Bytes(4, "magic") != std::string(kMagic, 4)) {
    throw FormatError("not a checkpoint (bad magic): " + path.string());
  }
  CheckpointData data;
  data.version = r.U32("version");
  if (data.version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(data.version));
  }
  const uint32_t meta_len = r.U32("metadata length");
  try {
    data.meta = nlohmann::json::parse(r.Bytes(meta_len, "metadata"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  const uint32_t count = r.U32("array count");
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = r.Bytes(r.U32("name length"), "name");
    const uint32_t rows = r.U32("rows"), cols = r.U32("cols");
    Matrix m(rows, cols);
    r.Floats(m.data(), static_cast<size_t>(rows) * cols, "array data");
    data.arrays.emplace(name, std::move(m));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint arrays");
  return data;
}

void StoreModel(const SingleCodec& model, CheckpointData& data) {
  data.meta["config"] = model.config();
  for (const auto& [name, p] : model.NamedParameters()) {
    data.arrays["model." + name] = p.value();
  }
  const Codebook& cb = model.quantizer().codebook();
  data.arrays["codebook.vectors"] = cb.vectors;
  data.arrays["codebook.ema_cluster_size"] = cb.ema_cluster_size.transpose();
  data.arrays["codebook.ema_embed_sum"] = cb.ema_embed_sum;
  data.meta["codebook"] = {{"initialized", cb.initialized}, {"last_used", cb.last_used}};
}

void RestoreParameters(const CheckpointData& data, const std::string& prefix,
                       nn::Module& module) {
  for (auto& [name, p] : module.NamedParameters()) {
    auto it = data.arrays.find(prefix + name);
    if (it == data.arrays.end()) {
      throw FormatError("checkpoint is missing parameter " + prefix + name);
    }
    if (it->second.rows() != p.rows() || it->second.cols() != p.cols()) {
      throw FormatError("checkpoint parameter " + prefix + name + " has shape " +
                        std::to_string(it->second.rows()) + "x" +
                        std::to_string(it->second.cols()));
    }
    nn::Tensor t = p;
    t.mutable_value() = it->second;
  }
}

std::unique_ptr<SingleCodec> RestoreModel(const CheckpointData& data) {
  if (!data.meta.contains("config")) throw FormatError("checkpoint has no config");
  ModelConfig config;
  try {
    config = data.meta.at("config").get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  auto model = std::make_unique<SingleCodec>(config, 0);
  RestoreParameters(data, "model.", *model);
  Codebook& cb = model->quantizer().mutable_codebook();
  auto get = [&](const std::string& name) -> const Matrix& {
    auto it = data.arrays.find(name);
    if (it == data.arrays.end()) throw FormatError("checkpoint is missing " + name);
    return it->second;
  };
  const Matrix& vectors = get("codebook.vectors");
  if (vectors.rows() != cb.vectors.rows() || vectors.cols() != cb.vectors.cols()) {
    throw FormatError("codebook shape does not match config");
  }
  cb.vectors = vectors;
  cb.ema_cluster_size = get("codebook.ema_cluster_size").transpose();
  cb.ema_embed_sum = get("codebook.ema_embed_sum");
  if (data.meta.contains("codebook")) {
    cb.initialized = data.meta["codebook"].value("initialized", true);
    cb.last_used = data.meta["codebook"]["last_used"].get<std::vector<int64_t>>();
  } else {
    cb.initialized = true;
  }
  return model;
}

}  // namespace singlecodec
