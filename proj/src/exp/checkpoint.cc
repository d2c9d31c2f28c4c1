// src/exp/checkpoint.cc

// Copyright 2026  The casc-tar Authors

// See the top-level LICENSE file for the full license text.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "casc/exp/checkpoint.h"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "casc/base/errors.h"

CASC_BEGIN_NAMESPACE

namespace {

constexpr char kMagic[8] = {'C', 'A', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::size_t kLengthOffset = 12;

class Writer {
 public:
  void Bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const uint8_t *>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void U8(uint8_t v) { out_.push_back(v); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F32(float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    U32(u);
  }
  void Str(const std::string &s) {
    U32(static_cast<uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  std::vector<uint8_t> &bytes() { return out_; }

 private:
  std::vector<uint8_t> out_;
};

// Bounds-checked reader over a checksum-verified buffer, so a short read
// means a malformed (not truncated) file.
class Reader {
 public:
  Reader(const std::vector<uint8_t> &b, std::size_t end) : b_(b), end_(end) {}

  void Need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("checkpoint: malformed record at byte " + std::to_string(pos_));
  }
  uint8_t U8() {
    Need(1);
    return b_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float F32() {
    const uint32_t u = U32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s(reinterpret_cast<const char *>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void Skip(std::size_t n) {
    Need(n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<uint8_t> &b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

uint32_t Crc(const uint8_t *p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<uint32_t>(c);
}

}  // namespace

std::vector<uint8_t> SerializeCheckpoint(const CascadedModel &model, const TrainConfig &config) {
  if (!(config.model == model.config()))
    throw ConfigError("checkpoint: model does not match config.model");
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(kCheckpointVersion);
  w.U64(0);  // patched below
  w.Str(TrainConfigToJson(config).dump());
  const auto &params = model.params().all();
  w.U32(static_cast<uint32_t>(params.size()));
  for (const Parameter &p : params) {
    w.Str(p.name);
    w.U8(kDtypeF32);
    w.U32(static_cast<uint32_t>(p.value.rank()));
    for (int d : p.value.shape()) w.U32(static_cast<uint32_t>(d));
    for (Real v : p.value.vec()) w.F32(static_cast<float>(v));
  }
  std::vector<uint8_t> &b = w.bytes();
  const uint64_t length = b.size() + 4;
  for (int i = 0; i < 8; ++i) b[kLengthOffset + i] = static_cast<uint8_t>(length >> (8 * i));
  w.U32(Crc(b.data(), b.size()));
  return std::move(b);
}

LoadedCheckpoint DeserializeCheckpoint(const std::vector<uint8_t> &bytes) {
  if (bytes.size() < sizeof(kMagic))
    throw TruncatedError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes, shorter than the magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("checkpoint: bad magic, not a checkpoint file");
  Reader header(bytes, bytes.size());
  if (bytes.size() < kLengthOffset + 8)
    throw TruncatedError("checkpoint truncated: header ends at " + std::to_string(bytes.size()) + " bytes");
  header.Skip(sizeof(kMagic));
  const uint32_t version = header.U32();
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint: format version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));
  const uint64_t length = header.U64();
  if (bytes.size() < length)
    throw TruncatedError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes, header says " +
                         std::to_string(length));
  if (bytes.size() > length)
    throw FormatError("checkpoint: " + std::to_string(bytes.size() - length) + " trailing bytes");
  if (length < kLengthOffset + 8 + 4) throw FormatError("checkpoint: impossible length field");
  const std::size_t body = length - 4;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<uint32_t>(bytes[body + i]) << (8 * i);
  if (Crc(bytes.data(), body) != stored) throw ChecksumError("checkpoint: checksum mismatch");

  Reader r(bytes, body);
  r.Skip(kLengthOffset + 8);
  LoadedCheckpoint out;
  try {
    out.config = TrainConfigFromString(r.Str());
  } catch (const ConfigError &e) {
    throw FormatError(std::string("checkpoint: bad config snapshot: ") + e.what());
  }
  out.model = std::make_unique<CascadedModel>(out.config.model, 0);
  auto &params = out.model->params().all();
  const uint32_t count = r.U32();
  if (count != params.size())
    throw FormatError("checkpoint: " + std::to_string(count) + " blobs, config implies " +
                      std::to_string(params.size()));
  for (Parameter &p : params) {
    const std::string name = r.Str();
    if (name != p.name) throw FormatError("checkpoint: blob \"" + name + "\", expected \"" + p.name + "\"");
    if (r.U8() != kDtypeF32) throw FormatError("checkpoint: blob \"" + name + "\" has unknown dtype");
    Shape shape(r.U32());
    for (int &d : shape) d = static_cast<int>(r.U32());
    if (shape != p.value.shape())
      throw FormatError("checkpoint: blob \"" + name + "\" shape " + ShapeString(shape) +
                        ", config implies " + ShapeString(p.value.shape()));
    for (Real &v : p.value.vec()) v = static_cast<Real>(r.F32());
  }
  if (r.pos() != body) throw FormatError("checkpoint: unread bytes after the last blob");
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string &path, const std::vector<uint8_t> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsageError("write failed for " + path);
}

void SaveCheckpoint(const std::string &path, const CascadedModel &model, const TrainConfig &config) {
  WriteFileBytes(path, SerializeCheckpoint(model, config));
}

LoadedCheckpoint LoadCheckpoint(const std::string &path) {
  return DeserializeCheckpoint(ReadFileBytes(path));
}

void LoadParametersInto(const LoadedCheckpoint &ckpt, CascadedModel &model) {
  const ModelConfig &have = ckpt.model->config(), &want = model.config();
  if (!(have == want)) {
    std::string why = "architecture differs";
    if (have.decoder != want.decoder)
      why = std::string("checkpoint decoder is ") + DecoderKindName(have.decoder) +
            ", model decoder is " + DecoderKindName(want.decoder);
    throw ConfigError("cannot load checkpoint into model: " + why);
  }
  auto &dst = model.params().all();
  const auto &src = ckpt.model->params().all();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i].value = src[i].value;
}

uint32_t ParameterChecksum(const CascadedModel &model) {
  Writer w;
  for (const Parameter &p : model.params().all()) {
    w.Str(p.name);
    for (Real v : p.value.vec()) w.F32(static_cast<float>(v));
  }
  return Crc(w.bytes().data(), w.bytes().size());
}

CASC_END_NAMESPACE
