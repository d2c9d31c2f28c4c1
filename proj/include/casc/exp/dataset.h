// include/casc/exp/dataset.h

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

#ifndef CASC_EXP_DATASET_H_
#define CASC_EXP_DATASET_H_

#include <string>
#include <vector>

#include "casc/data/synth.h"

CASC_BEGIN_NAMESPACE

// A dataset is a manifest of JSON lines plus a sidecar of little-endian
// f32 features:
//   line 1:  {"format":"casc-manifest","version":1,"features":"<file>",
//             "synth":{...generation parameters...}}
//   line i:  {"id":..., "tokens":[...], "frames":T, "dim":F, "offset":bytes}
// The sidecar path is relative to the manifest's directory.
struct DatasetSpec {
  SynthTaskSpec task;
  int count = 64;
  int min_tokens = 4;
  int max_tokens = 12;
  uint64_t seed = 1;
  std::string prefix = "utt";
};

std::vector<Utterance> GenerateFromSpec(const DatasetSpec &spec);

// Writes <stem>.jsonl and <stem>.f32; returns the manifest path.
std::string WriteDataset(const std::string &stem, const std::vector<Utterance> &utts,
                         const DatasetSpec &spec);
std::vector<Utterance> ReadDataset(const std::string &manifest_path);

CASC_END_NAMESPACE

#endif  // CASC_EXP_DATASET_H_
