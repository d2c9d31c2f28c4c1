// include/casc/model/model.h

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

#ifndef CASC_MODEL_MODEL_H_
#define CASC_MODEL_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "casc/base/rng.h"
#include "casc/model/config.h"
#include "casc/tensor/tape.h"

CASC_BEGIN_NAMESPACE

enum class ParamInit { kZero, kOne, kFanIn, kEmbedding };

// One entry of a model's parameter layout. `group` is one of "causal",
// "noncausal", "predictor", "joint".
struct ParamSpec {
  std::string name;
  Shape shape;
  ParamInit init;
  std::string group;
};

// Every parameter a config implies, in a fixed order. Model construction
// and analytic counting both derive from this list.
std::vector<ParamSpec> ParamLayout(const ModelConfig &config);

struct ParamBreakdown {
  std::size_t causal_encoder = 0;
  std::size_t noncausal_encoder = 0;
  std::size_t predictor = 0;
  std::size_t joint = 0;
  std::size_t total = 0;

  std::size_t decoder() const { return predictor + joint; }
};

ParamBreakdown CountParams(const ModelConfig &config);

// Named parameters in layout order. Storage never moves after
// construction, so Parameter pointers stay valid for the store's lifetime.
class ParamStore {
 public:
  ParamStore() = default;
  explicit ParamStore(const std::vector<ParamSpec> &layout);
  ParamStore(const ParamStore &) = delete;
  ParamStore &operator=(const ParamStore &) = delete;

  Parameter &Get(const std::string &name);
  const Parameter &Get(const std::string &name) const;
  Parameter *Find(const std::string &name);
  const std::string &GroupOf(const std::string &name) const;

  std::vector<Parameter> &all() { return params_; }
  const std::vector<Parameter> &all() const { return params_; }
  std::size_t NumValues() const;

  void ZeroGrads();
  void SetFrozen(bool frozen);

 private:
  std::vector<Parameter> params_;
  std::vector<std::string> groups_;
  std::map<std::string, std::size_t> index_;
};

struct LayerNormW {
  Parameter *gamma = nullptr;
  Parameter *beta = nullptr;
};

struct LinearW {
  Parameter *w = nullptr;
  Parameter *b = nullptr;  // may be null
};

struct FfnW {
  LayerNormW ln;
  LinearW up, down;
};

struct MhsaW {
  LayerNormW ln;
  LinearW q, k, v, o;
  Parameter *rel_bias = nullptr;  // [heads x (2R+1)]
};

struct ConvW {
  LayerNormW ln;
  LinearW pointwise1;  // D -> 2D, then GLU
  LinearW depthwise;   // w [K x D], b [D]
  LayerNormW mid_ln;
  LinearW pointwise2;  // D -> D
};

struct BlockW {
  FfnW ffn1;
  MhsaW mhsa;
  ConvW conv;
  FfnW ffn2;
  LayerNormW final_ln;
};

struct LstmLayerW {
  Parameter *w_ih = nullptr;  // [in x 4H], gate order i, f, g, o
  Parameter *w_hh = nullptr;  // [H x 4H]
  Parameter *b = nullptr;     // [4H]
};

struct PredictorW {
  Parameter *embed = nullptr;  // [V x E]; the tied joint output for TAR
  // LSTM
  std::vector<LstmLayerW> lstm;
  LinearW proj;                // LSTM: H -> P; TAR: E -> E
  // TAR
  Parameter *positions = nullptr;     // [N x E]
  Parameter *head_logits = nullptr;   // [heads x N]
  LayerNormW ln;
};

struct JointW {
  LinearW enc;                  // D -> J
  Parameter *pred = nullptr;    // [P x J]; absent for TAR
  Parameter *out = nullptr;     // [J x V]; absent when tied
  Parameter *out_bias = nullptr;
};

// Causal encoder, non-causal encoder, shared predictor and joint. There is
// exactly one causal encoder; the non-causal stack reads its output.
class CascadedModel {
 public:
  // Parameters initialised from `seed`.
  CascadedModel(const ModelConfig &config, uint64_t seed);
  CascadedModel(const CascadedModel &) = delete;
  CascadedModel &operator=(const CascadedModel &) = delete;

  std::unique_ptr<CascadedModel> Clone() const;

  const ModelConfig &config() const { return config_; }
  ParamStore &params() { return params_; }
  const ParamStore &params() const { return params_; }

  LinearW &input_proj() { return input_proj_; }
  std::vector<BlockW> &causal_blocks() { return causal_; }
  std::vector<BlockW> &noncausal_blocks() { return noncausal_; }
  PredictorW &predictor() { return predictor_; }
  JointW &joint() { return joint_; }

  // Joint output matrix is the predictor embedding (one storage object).
  bool tied() const { return joint_.out == nullptr; }

  ParamBreakdown CountParams() const;

 private:
  void Bind();

  ModelConfig config_;
  ParamStore params_;
  LinearW input_proj_;
  std::vector<BlockW> causal_, noncausal_;
  PredictorW predictor_;
  JointW joint_;
};

// Evaluation context threaded through the model functions. Dropout is
// active only when `training` is set, using `rng`.
struct Graph {
  Tape &tape;
  bool training = false;
  double dropout = 0.0;
  Rng *rng = nullptr;

  DiffArray P(Parameter *p) const { return tape.Param(*p); }
  DiffArray MaybeDropout(const DiffArray &x) const;
};

CASC_END_NAMESPACE

#endif  // CASC_MODEL_MODEL_H_
