// include/casc/exp/checkpoint.h

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

#ifndef CASC_EXP_CHECKPOINT_H_
#define CASC_EXP_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "casc/exp/config.h"
#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

// Checkpoint byte layout, all integers little-endian:
//
//   offset 0   magic        8 bytes  "CASCKPT\0"
//          8   version      u32      kCheckpointVersion
//         12   file_length  u64      total bytes including the checksum
//         20   config_len   u32
//         24   config       config_len bytes of JSON (TrainConfig)
//              blob_count   u32
//              per blob:    u32 name_len, name bytes, u8 dtype (1 = f32),
//                           u32 rank, rank x u32 dims,
//                           prod(dims) x f32 payload
//   length-4   checksum     u32      CRC-32 (zlib) of bytes [0, length-4)
//
// Load checks, in order: magic (FormatError), version (VersionError),
// length against the header (TruncatedError when short, FormatError when
// long), checksum (ChecksumError), then structure (FormatError).
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint8_t kDtypeF32 = 1;

std::vector<uint8_t> SerializeCheckpoint(const CascadedModel &model, const TrainConfig &config);

struct LoadedCheckpoint {
  TrainConfig config;
  std::unique_ptr<CascadedModel> model;
};

LoadedCheckpoint DeserializeCheckpoint(const std::vector<uint8_t> &bytes);

// The checkpoint's model config must equal config.model of `config` passed
// to SaveCheckpoint; SaveCheckpoint rejects a mismatch with ConfigError.
void SaveCheckpoint(const std::string &path, const CascadedModel &model, const TrainConfig &config);
LoadedCheckpoint LoadCheckpoint(const std::string &path);

// Copies checkpoint parameters into an existing model. ConfigError when
// the architectures differ.
void LoadParametersInto(const LoadedCheckpoint &ckpt, CascadedModel &model);

std::vector<uint8_t> ReadFileBytes(const std::string &path);
void WriteFileBytes(const std::string &path, const std::vector<uint8_t> &bytes);

// CRC-32 of every parameter payload in layout order (names included).
uint32_t ParameterChecksum(const CascadedModel &model);

CASC_END_NAMESPACE

#endif  // CASC_EXP_CHECKPOINT_H_
