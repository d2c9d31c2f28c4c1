// src/exp/config.cc

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

#include "casc/exp/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "casc/base/errors.h"

CASC_BEGIN_NAMESPACE

using nlohmann::json;
using nlohmann::ordered_json;

const char *LrDecayName(LrDecay decay) {
  return decay == LrDecay::kConstant ? "constant" : "inverse_sqrt";
}

LrDecay ParseLrDecay(const std::string &name) {
  if (name == "constant") return LrDecay::kConstant;
  if (name == "inverse_sqrt") return LrDecay::kInverseSqrt;
  throw ConfigError("lr_decay must be \"constant\" or \"inverse_sqrt\", got \"" + name + "\"");
}

void TrainConfig::Validate() const {
  model.Validate();
  auto positive = [](const char *key, double v) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be > 0");
  };
  positive("learning_rate", learning_rate);
  positive("adam_eps", adam_eps);
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) throw ConfigError("adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) throw ConfigError("adam_beta2 must be in [0, 1)");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be >= 0");
  if (!(grad_clip >= 0)) throw ConfigError("grad_clip must be >= 0");
  if (!(causal_weight >= 0 && causal_weight <= 1))
    throw ConfigError("causal_weight must be in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (augment.time_masks < 0 || augment.time_width < 0 || augment.freq_masks < 0 ||
      augment.freq_width < 0)
    throw ConfigError("augment values must be >= 0");
  if (distill) {
    distill->kd.Validate();
    if (distill->teacher.empty()) throw ConfigError("distill.teacher must name a checkpoint");
    for (double v : {distill->causal_scale, distill->noncausal_scale})
      if (!(v >= 0 && v <= 1)) throw ConfigError("distill branch scales must be in [0, 1]");
  }
}

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Where("") + " must be an object");
  }

  template <typename T>
  void Read(const char *key, T &out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, uint64_t>) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0))
          throw ConfigError("");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->template get<T>();
    } catch (const std::exception &) {
      throw ConfigError(Where(key) + " has the wrong type: " + it->dump());
    }
  }

  const json *Child(const char *key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string Where(const std::string &key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  // Call after all reads.
  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key \"" + Where(it.key()) + "\"");
  }

 private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ordered_json ModelConfigToJson(const ModelConfig &c) {
  ordered_json j;
  j["feature_dim"] = c.feature_dim;
  j["subsample_factor"] = c.subsample_factor;
  j["model_dim"] = c.model_dim;
  j["causal_layers"] = c.causal_layers;
  j["noncausal_layers"] = c.noncausal_layers;
  j["num_heads"] = c.num_heads;
  j["conv_kernel"] = c.conv_kernel;
  j["ffn_multiplier"] = c.ffn_multiplier;
  j["max_relative_position"] = c.max_relative_position;
  j["vocab_size"] = c.vocab_size;
  j["decoder"] = DecoderKindName(c.decoder);
  j["lstm_embed_dim"] = c.lstm_embed_dim;
  j["lstm_hidden_dim"] = c.lstm_hidden_dim;
  j["lstm_layers"] = c.lstm_layers;
  j["pred_dim"] = c.pred_dim;
  j["joint_dim"] = c.joint_dim;
  j["tar_embed_dim"] = c.tar_embed_dim;
  j["tar_history"] = c.tar_history;
  j["tar_heads"] = c.tar_heads;
  j["tar_tied"] = c.tar_tied;
  j["dropout"] = c.dropout;
  return j;
}

namespace {

ModelConfig ReadModel(const json &j, const std::string &path) {
  ModelConfig c;
  Section s(j, path);
  s.Read("feature_dim", c.feature_dim);
  s.Read("subsample_factor", c.subsample_factor);
  s.Read("model_dim", c.model_dim);
  s.Read("causal_layers", c.causal_layers);
  s.Read("noncausal_layers", c.noncausal_layers);
  s.Read("num_heads", c.num_heads);
  s.Read("conv_kernel", c.conv_kernel);
  s.Read("ffn_multiplier", c.ffn_multiplier);
  s.Read("max_relative_position", c.max_relative_position);
  s.Read("vocab_size", c.vocab_size);
  std::string decoder = DecoderKindName(c.decoder);
  s.Read("decoder", decoder);
  c.decoder = ParseDecoderKind(decoder);
  s.Read("lstm_embed_dim", c.lstm_embed_dim);
  s.Read("lstm_hidden_dim", c.lstm_hidden_dim);
  s.Read("lstm_layers", c.lstm_layers);
  s.Read("pred_dim", c.pred_dim);
  s.Read("joint_dim", c.joint_dim);
  s.Read("tar_embed_dim", c.tar_embed_dim);
  s.Read("tar_history", c.tar_history);
  s.Read("tar_heads", c.tar_heads);
  s.Read("tar_tied", c.tar_tied);
  s.Read("dropout", c.dropout);
  s.Finish();
  return c;
}

}  // namespace

ModelConfig ModelConfigFromJson(const json &j) { return ReadModel(j, "model"); }

ordered_json TrainConfigToJson(const TrainConfig &c) {
  ordered_json j;
  j["model"] = ModelConfigToJson(c.model);
  j["learning_rate"] = c.learning_rate;
  j["warmup_steps"] = c.warmup_steps;
  j["lr_decay"] = LrDecayName(c.lr_decay);
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  j["weight_decay"] = c.weight_decay;
  j["grad_clip"] = c.grad_clip;
  j["causal_weight"] = c.causal_weight;
  j["batch_size"] = c.batch_size;
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  ordered_json a;
  a["time_masks"] = c.augment.time_masks;
  a["time_width"] = c.augment.time_width;
  a["freq_masks"] = c.augment.freq_masks;
  a["freq_width"] = c.augment.freq_width;
  j["augment"] = a;
  if (c.distill) {
    ordered_json d;
    d["alpha"] = c.distill->kd.alpha;
    d["temperature"] = c.distill->kd.temperature;
    d["mode"] = KdModeName(c.distill->kd.mode);
    d["teacher"] = c.distill->teacher;
    d["causal_scale"] = c.distill->causal_scale;
    d["noncausal_scale"] = c.distill->noncausal_scale;
    j["distill"] = d;
  }
  return j;
}

TrainConfig TrainConfigFromJson(const json &j) {
  TrainConfig c;
  Section s(j, "");
  if (const json *m = s.Child("model")) c.model = ReadModel(*m, "model");
  s.Read("learning_rate", c.learning_rate);
  s.Read("warmup_steps", c.warmup_steps);
  std::string decay = LrDecayName(c.lr_decay);
  s.Read("lr_decay", decay);
  c.lr_decay = ParseLrDecay(decay);
  s.Read("adam_beta1", c.adam_beta1);
  s.Read("adam_beta2", c.adam_beta2);
  s.Read("adam_eps", c.adam_eps);
  s.Read("weight_decay", c.weight_decay);
  s.Read("grad_clip", c.grad_clip);
  s.Read("causal_weight", c.causal_weight);
  s.Read("batch_size", c.batch_size);
  s.Read("steps", c.steps);
  s.Read("seed", c.seed);
  if (const json *a = s.Child("augment")) {
    Section as(*a, "augment");
    as.Read("time_masks", c.augment.time_masks);
    as.Read("time_width", c.augment.time_width);
    as.Read("freq_masks", c.augment.freq_masks);
    as.Read("freq_width", c.augment.freq_width);
    as.Finish();
  }
  if (const json *d = s.Child("distill"); d && !d->is_null()) {
    DistillConfig dc;
    Section ds(*d, "distill");
    ds.Read("alpha", dc.kd.alpha);
    ds.Read("temperature", dc.kd.temperature);
    std::string mode = KdModeName(dc.kd.mode);
    ds.Read("mode", mode);
    dc.kd.mode = ParseKdMode(mode);
    ds.Read("teacher", dc.teacher);
    ds.Read("causal_scale", dc.causal_scale);
    ds.Read("noncausal_scale", dc.noncausal_scale);
    ds.Finish();
    c.distill = dc;
  }
  s.Finish();
  c.Validate();
  return c;
}

std::string TrainConfigToString(const TrainConfig &c) { return TrainConfigToJson(c).dump(2) + "\n"; }

TrainConfig TrainConfigFromString(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return TrainConfigFromJson(j);
}

TrainConfig LoadTrainConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return TrainConfigFromString(ss.str());
}

TrainConfig ApplyOverrides(const TrainConfig &base, const std::vector<std::string> &overrides) {
  json j = TrainConfigToJson(base);
  for (const std::string &o : overrides) {
    const std::size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override \"" + o + "\" is not key=value");
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error &) {
      value = text;
    }
    json *node = &j;
    std::size_t start = 0;
    for (;;) {
      const std::size_t dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return TrainConfigFromJson(j);
}

TrainConfig Preset(const std::string &name) {
  TrainConfig c;
  if (name == "full") {
    c.model.model_dim = 256;
    c.model.conv_kernel = 31;
    c.model.vocab_size = 1000;
    c.model.lstm_embed_dim = c.model.lstm_hidden_dim = 560;
    c.model.pred_dim = c.model.joint_dim = 560;
    c.model.tar_embed_dim = 768;
    c.batch_size = 128;
  } else if (name == "desk") {
    // ModelConfig defaults.
  } else if (name == "toy") {
    ModelConfig &m = c.model;
    m.model_dim = 64;
    m.causal_layers = 4;
    m.noncausal_layers = 2;
    m.num_heads = 4;
    m.conv_kernel = 7;
    m.max_relative_position = 8;
    m.lstm_embed_dim = m.lstm_hidden_dim = m.pred_dim = m.joint_dim = 64;
    m.tar_embed_dim = 64;
    c.learning_rate = 2e-3;
    c.warmup_steps = 100;
    c.batch_size = 8;
    c.steps = 600;
  } else {
    throw ConfigError("unknown preset \"" + name + "\"");
  }
  c.Validate();
  return c;
}

std::vector<std::string> PresetNames() { return {"full", "desk", "toy"}; }

CASC_END_NAMESPACE
