// src/model/model.cc

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

#include "casc/model/model.h"

#include <cmath>

#include "casc/base/errors.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

namespace {

class LayoutBuilder {
 public:
  explicit LayoutBuilder(std::vector<ParamSpec> *out) : out_(out) {}

  void Add(const std::string &group, const std::string &name, Shape shape, ParamInit init) {
    out_->push_back({name, std::move(shape), init, group});
  }
  void LayerNorm(const std::string &group, const std::string &prefix, int dim) {
    Add(group, prefix + ".gamma", {dim}, ParamInit::kOne);
    Add(group, prefix + ".beta", {dim}, ParamInit::kZero);
  }
  void Linear(const std::string &group, const std::string &prefix, int in, int out,
              bool bias = true) {
    Add(group, prefix + ".w", {in, out}, ParamInit::kFanIn);
    if (bias) Add(group, prefix + ".b", {out}, ParamInit::kZero);
  }

 private:
  std::vector<ParamSpec> *out_;
};

void AddBlockLayout(LayoutBuilder &b, const std::string &group, const std::string &p,
                    const ModelConfig &c) {
  const int d = c.model_dim, hidden = c.ffn_multiplier * c.model_dim;
  // Storage order follows evaluation order: ffn1, mhsa, conv, ffn2.
  b.LayerNorm(group, p + ".ffn1.ln", d);
  b.Linear(group, p + ".ffn1.up", d, hidden);
  b.Linear(group, p + ".ffn1.down", hidden, d);
  b.LayerNorm(group, p + ".mhsa.ln", d);
  for (const char *proj : {".q", ".k", ".v", ".o"}) b.Linear(group, p + ".mhsa" + proj, d, d);
  b.Add(group, p + ".mhsa.rel_bias", {c.num_heads, 2 * c.max_relative_position + 1},
        ParamInit::kZero);
  b.LayerNorm(group, p + ".conv.ln", d);
  b.Linear(group, p + ".conv.pointwise1", d, 2 * d);
  b.Add(group, p + ".conv.depthwise.w", {c.conv_kernel, d}, ParamInit::kFanIn);
  b.Add(group, p + ".conv.depthwise.b", {d}, ParamInit::kZero);
  b.LayerNorm(group, p + ".conv.mid_ln", d);
  b.Linear(group, p + ".conv.pointwise2", d, d);
  b.LayerNorm(group, p + ".ffn2.ln", d);
  b.Linear(group, p + ".ffn2.up", d, hidden);
  b.Linear(group, p + ".ffn2.down", hidden, d);
  b.LayerNorm(group, p + ".final_ln", d);
}

uint64_t NameHash(const std::string &s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Initialise(Parameter &p, ParamInit init, uint64_t seed) {
  Rng rng = Rng::Derive(seed, NameHash(p.name));
  switch (init) {
    case ParamInit::kZero:
      p.value.Fill(0);
      break;
    case ParamInit::kOne:
      p.value.Fill(1);
      break;
    case ParamInit::kFanIn: {
      // Depthwise kernels [K x C] have fan-in K; dense [in x out] has in.
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.value.dim(0)));
      for (Real &v : p.value.vec()) v = static_cast<Real>(rng.Uniform(-bound, bound));
      break;
    }
    case ParamInit::kEmbedding: {
      const double sd = 1.0 / std::sqrt(static_cast<double>(p.value.cols()));
      for (Real &v : p.value.vec()) v = static_cast<Real>(rng.Normal(0, sd));
      break;
    }
  }
}

}  // namespace

std::vector<ParamSpec> ParamLayout(const ModelConfig &c) {
  c.Validate();
  std::vector<ParamSpec> out;
  LayoutBuilder b(&out);
  const int d = c.model_dim, v = c.vocab_size;
  b.Linear("causal", "causal.input", c.feature_dim * c.subsample_factor, d);
  for (int i = 0; i < c.causal_layers; ++i)
    AddBlockLayout(b, "causal", "causal.block" + std::to_string(i), c);
  for (int i = 0; i < c.noncausal_layers; ++i)
    AddBlockLayout(b, "noncausal", "noncausal.block" + std::to_string(i), c);

  if (c.decoder == DecoderKind::kLstm) {
    b.Add("predictor", "pred.embed", {v, c.lstm_embed_dim}, ParamInit::kEmbedding);
    int in = c.lstm_embed_dim;
    const int h = c.lstm_hidden_dim;
    for (int l = 0; l < c.lstm_layers; ++l) {
      const std::string p = "pred.lstm" + std::to_string(l);
      b.Add("predictor", p + ".w_ih", {in, 4 * h}, ParamInit::kFanIn);
      b.Add("predictor", p + ".w_hh", {h, 4 * h}, ParamInit::kFanIn);
      b.Add("predictor", p + ".b", {4 * h}, ParamInit::kZero);
      in = h;
    }
    b.Linear("predictor", "pred.proj", h, c.pred_dim);
    b.Linear("joint", "joint.enc", d, c.joint_dim);
    b.Add("joint", "joint.pred.w", {c.pred_dim, c.joint_dim}, ParamInit::kFanIn);
    b.Add("joint", "joint.out.w", {c.joint_dim, v}, ParamInit::kFanIn);
    b.Add("joint", "joint.out.b", {v}, ParamInit::kZero);
  } else {
    const int e = c.tar_embed_dim;
    b.Add("predictor", "pred.embed", {v, e}, ParamInit::kEmbedding);
    b.Add("predictor", "pred.positions", {c.tar_history, e}, ParamInit::kEmbedding);
    b.Add("predictor", "pred.head_logits", {c.tar_heads, c.tar_history}, ParamInit::kZero);
    b.Linear("predictor", "pred.proj", e, e);
    b.LayerNorm("predictor", "pred.ln", e);
    b.Linear("joint", "joint.enc", d, e);
    if (!c.tar_tied) b.Add("joint", "joint.out.w", {e, v}, ParamInit::kFanIn);
    b.Add("joint", "joint.out.b", {v}, ParamInit::kZero);
  }
  return out;
}

ParamBreakdown CountParams(const ModelConfig &config) {
  ParamBreakdown r;
  for (const ParamSpec &s : ParamLayout(config)) {
    const std::size_t n = NumElements(s.shape);
    if (s.group == "causal") r.causal_encoder += n;
    else if (s.group == "noncausal") r.noncausal_encoder += n;
    else if (s.group == "predictor") r.predictor += n;
    else r.joint += n;
    r.total += n;
  }
  return r;
}

ParamStore::ParamStore(const std::vector<ParamSpec> &layout) {
  params_.reserve(layout.size());
  for (const ParamSpec &s : layout) {
    if (index_.count(s.name)) throw UsageError("duplicate parameter " + s.name);
    index_[s.name] = params_.size();
    params_.push_back(Parameter{s.name, Array(s.shape), {}});
    groups_.push_back(s.group);
  }
}

Parameter *ParamStore::Find(const std::string &name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

Parameter &ParamStore::Get(const std::string &name) {
  Parameter *p = Find(name);
  if (!p) throw ConfigError("no parameter named " + name);
  return *p;
}

const Parameter &ParamStore::Get(const std::string &name) const {
  return const_cast<ParamStore *>(this)->Get(name);
}

const std::string &ParamStore::GroupOf(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("no parameter named " + name);
  return groups_[it->second];
}

std::size_t ParamStore::NumValues() const {
  std::size_t n = 0;
  for (const Parameter &p : params_) n += p.value.size();
  return n;
}

void ParamStore::ZeroGrads() {
  for (Parameter &p : params_) p.ZeroGrad();
}

void ParamStore::SetFrozen(bool frozen) {
  for (Parameter &p : params_) p.frozen = frozen;
}

CascadedModel::CascadedModel(const ModelConfig &config, uint64_t seed)
    : config_(config), params_(ParamLayout(config)) {
  const std::vector<ParamSpec> layout = ParamLayout(config);
  for (std::size_t i = 0; i < layout.size(); ++i)
    Initialise(params_.all()[i], layout[i].init, seed);
  Bind();
}

std::unique_ptr<CascadedModel> CascadedModel::Clone() const {
  auto copy = std::make_unique<CascadedModel>(config_, 0);
  for (std::size_t i = 0; i < params_.all().size(); ++i) {
    copy->params_.all()[i].value = params_.all()[i].value;
    copy->params_.all()[i].frozen = params_.all()[i].frozen;
  }
  return copy;
}

ParamBreakdown CascadedModel::CountParams() const {
  ParamBreakdown r;
  for (const Parameter &p : params_.all()) {
    const std::string &g = params_.GroupOf(p.name);
    const std::size_t n = p.value.size();
    if (g == "causal") r.causal_encoder += n;
    else if (g == "noncausal") r.noncausal_encoder += n;
    else if (g == "predictor") r.predictor += n;
    else r.joint += n;
    r.total += n;
  }
  return r;
}

void CascadedModel::Bind() {
  auto ln = [&](const std::string &p) {
    return LayerNormW{&params_.Get(p + ".gamma"), &params_.Get(p + ".beta")};
  };
  auto lin = [&](const std::string &p) {
    return LinearW{&params_.Get(p + ".w"), params_.Find(p + ".b")};
  };
  auto block = [&](const std::string &p) {
    BlockW b;
    b.ffn1 = {ln(p + ".ffn1.ln"), lin(p + ".ffn1.up"), lin(p + ".ffn1.down")};
    b.mhsa.ln = ln(p + ".mhsa.ln");
    b.mhsa.q = lin(p + ".mhsa.q");
    b.mhsa.k = lin(p + ".mhsa.k");
    b.mhsa.v = lin(p + ".mhsa.v");
    b.mhsa.o = lin(p + ".mhsa.o");
    b.mhsa.rel_bias = &params_.Get(p + ".mhsa.rel_bias");
    b.conv.ln = ln(p + ".conv.ln");
    b.conv.pointwise1 = lin(p + ".conv.pointwise1");
    b.conv.depthwise = lin(p + ".conv.depthwise");
    b.conv.mid_ln = ln(p + ".conv.mid_ln");
    b.conv.pointwise2 = lin(p + ".conv.pointwise2");
    b.ffn2 = {ln(p + ".ffn2.ln"), lin(p + ".ffn2.up"), lin(p + ".ffn2.down")};
    b.final_ln = ln(p + ".final_ln");
    return b;
  };
  input_proj_ = lin("causal.input");
  causal_.clear();
  noncausal_.clear();
  for (int i = 0; i < config_.causal_layers; ++i)
    causal_.push_back(block("causal.block" + std::to_string(i)));
  for (int i = 0; i < config_.noncausal_layers; ++i)
    noncausal_.push_back(block("noncausal.block" + std::to_string(i)));

  predictor_ = PredictorW{};
  predictor_.embed = &params_.Get("pred.embed");
  predictor_.proj = lin("pred.proj");
  if (config_.decoder == DecoderKind::kLstm) {
    for (int l = 0; l < config_.lstm_layers; ++l) {
      const std::string p = "pred.lstm" + std::to_string(l);
      predictor_.lstm.push_back(
          {&params_.Get(p + ".w_ih"), &params_.Get(p + ".w_hh"), &params_.Get(p + ".b")});
    }
  } else {
    predictor_.positions = &params_.Get("pred.positions");
    predictor_.head_logits = &params_.Get("pred.head_logits");
    predictor_.ln = ln("pred.ln");
  }
  joint_ = JointW{};
  joint_.enc = lin("joint.enc");
  joint_.pred = params_.Find("joint.pred.w");
  joint_.out = params_.Find("joint.out.w");
  joint_.out_bias = &params_.Get("joint.out.b");
}

DiffArray Graph::MaybeDropout(const DiffArray &x) const {
  if (!training || dropout <= 0) return x;
  if (!rng) throw UsageError("Graph: dropout requested without an Rng");
  return Dropout(x, dropout, *rng);
}

CASC_END_NAMESPACE
