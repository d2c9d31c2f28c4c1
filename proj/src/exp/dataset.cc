// src/exp/dataset.cc

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

#include "casc/exp/dataset.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "casc/base/errors.h"

#include "json.hpp"

CASC_BEGIN_NAMESPACE

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<Utterance> GenerateFromSpec(const DatasetSpec &spec) {
  return GenerateDataset(spec.task, spec.count, spec.min_tokens, spec.max_tokens, spec.seed,
                         spec.prefix);
}

std::string WriteDataset(const std::string &stem, const std::vector<Utterance> &utts,
                         const DatasetSpec &spec) {
  namespace fs = std::filesystem;
  const std::string manifest = stem + ".jsonl", features = stem + ".f32";
  std::ofstream feat(features, std::ios::binary | std::ios::trunc);
  std::ofstream man(manifest, std::ios::trunc);
  if (!feat || !man) throw UsageError("cannot write dataset " + stem);

  ordered_json head;
  head["format"] = "casc-manifest";
  head["version"] = 1;
  head["features"] = fs::path(features).filename().string();
  ordered_json synth;
  synth["vocab_size"] = spec.task.vocab_size;
  synth["frames_per_token"] = spec.task.frames_per_token;
  synth["feature_dim"] = spec.task.feature_dim;
  synth["noise_std"] = spec.task.noise_std;
  synth["prototype_seed"] = spec.task.prototype_seed;
  synth["count"] = spec.count;
  synth["min_tokens"] = spec.min_tokens;
  synth["max_tokens"] = spec.max_tokens;
  synth["seed"] = spec.seed;
  head["synth"] = synth;
  man << head.dump() << "\n";

  uint64_t offset = 0;
  for (const Utterance &u : utts) {
    ordered_json rec;
    rec["id"] = u.id;
    rec["tokens"] = u.tokens;
    rec["frames"] = u.features.rows();
    rec["dim"] = u.features.cols();
    rec["offset"] = offset;
    man << rec.dump() << "\n";
    for (Real v : u.features.vec()) {
      const float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      const char le[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8),
                          static_cast<char>(bits >> 16), static_cast<char>(bits >> 24)};
      feat.write(le, 4);
    }
    offset += 4ull * u.features.size();
  }
  if (!feat || !man) throw UsageError("write failed for dataset " + stem);
  return manifest;
}

std::vector<Utterance> ReadDataset(const std::string &manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream man(manifest_path);
  if (!man) throw UsageError("cannot open manifest " + manifest_path);
  std::string line;
  if (!std::getline(man, line)) throw UsageError("empty manifest " + manifest_path);
  json head;
  try {
    head = json::parse(line);
  } catch (const json::parse_error &e) {
    throw UsageError("manifest header is not JSON: " + std::string(e.what()));
  }
  if (head.value("format", "") != "casc-manifest" || head.value("version", 0) != 1)
    throw UsageError(manifest_path + " is not a version 1 manifest");
  const fs::path feat_path = fs::path(manifest_path).parent_path() / head.at("features").get<std::string>();
  std::ifstream feat(feat_path, std::ios::binary);
  if (!feat) throw UsageError("cannot open features " + feat_path.string());
  const auto feat_size = static_cast<uint64_t>(fs::file_size(feat_path));

  std::vector<Utterance> out;
  int lineno = 1;
  while (std::getline(man, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      Utterance u;
      u.id = rec.at("id").get<std::string>();
      u.tokens = rec.at("tokens").get<std::vector<int>>();
      const int frames = rec.at("frames").get<int>(), dim = rec.at("dim").get<int>();
      const uint64_t offset = rec.at("offset").get<uint64_t>();
      const uint64_t nbytes = 4ull * frames * dim;
      if (frames < 0 || dim < 1 || offset + nbytes > feat_size)
        throw UsageError("feature range outside " + feat_path.string());
      std::vector<unsigned char> raw(nbytes);
      feat.seekg(static_cast<std::streamoff>(offset));
      feat.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(nbytes));
      u.features = Array(Shape{frames, dim});
      for (std::size_t i = 0; i < u.features.size(); ++i) {
        const uint32_t bits = raw[4 * i] | raw[4 * i + 1] << 8 | raw[4 * i + 2] << 16 |
                              static_cast<uint32_t>(raw[4 * i + 3]) << 24;
        float f;
        std::memcpy(&f, &bits, 4);
        u.features[i] = static_cast<Real>(f);
      }
      out.push_back(std::move(u));
    } catch (const json::exception &e) {
      throw UsageError(manifest_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

CASC_END_NAMESPACE
