// src/exp/train.cc

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

#include "casc/exp/train.h"

#include <cmath>
#include <sstream>

#include "casc/base/errors.h"
#include "casc/base/rng.h"
#include "casc/loss/distill.h"
#include "casc/loss/transducer.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

namespace {
constexpr uint64_t kOrderStream = 0x6f72646572ULL;
constexpr uint64_t kDropoutStream = 0x64726f70ULL;
constexpr uint64_t kAugmentStream = 0x61756720ULL;
}  // namespace

nlohmann::ordered_json StepMetricsToJson(const StepMetrics &m) {
  nlohmann::ordered_json j;
  j["type"] = "step";
  j["step"] = m.step;
  j["lr"] = m.learning_rate;
  j["loss"] = m.loss;
  j["rnnt_causal"] = m.rnnt_causal;
  j["rnnt_noncausal"] = m.rnnt_noncausal;
  j["kd_causal"] = m.kd_causal;
  j["kd_noncausal"] = m.kd_noncausal;
  j["grad_norm"] = m.grad_norm;
  j["tokens"] = m.tokens;
  j["frames"] = m.frames;
  return j;
}

double LearningRate(const TrainConfig &config, int step) {
  const double peak = config.learning_rate;
  const int w = config.warmup_steps;
  if (step < 1) step = 1;
  if (w > 0 && step <= w) return peak * step / w;
  if (config.lr_decay == LrDecay::kConstant || w == 0) return peak;
  return peak * std::sqrt(static_cast<double>(w) / step);
}

void CheckTeacherCompatible(const ModelConfig &teacher, const ModelConfig &student) {
  auto require = [](const char *what, int t, int s) {
    if (t != s)
      throw ConfigError(std::string("teacher/student ") + what + " mismatch: teacher " +
                        std::to_string(t) + ", student " + std::to_string(s));
  };
  require("vocab_size", teacher.vocab_size, student.vocab_size);
  require("subsample_factor", teacher.subsample_factor, student.subsample_factor);
  require("feature_dim", teacher.feature_dim, student.feature_dim);
}

BatchLoss ComputeBatchLoss(const Graph &g, CascadedModel &model,
                           const std::vector<const Utterance *> &batch, const TrainConfig &config,
                           CascadedModel *teacher) {
  if (batch.empty()) throw UsageError("ComputeBatchLoss: empty batch");
  const double alpha = teacher && config.distill ? config.distill->kd.alpha : 0.0;
  const double temp = config.distill ? config.distill->kd.temperature : 1.0;
  BatchLoss out;
  StepMetrics &m = out.metrics;
  std::vector<DiffArray> terms;
  for (const Utterance *u : batch) {
    DiffArray enc_c = EncodeCausal(g, model, u->features);
    DiffArray enc_n = EncodeNoncausal(g, model, enc_c);
    DiffArray pred = Predict(g, model, u->tokens);
    Lattice lat_c = BuildLattice(g, model, enc_c, pred);
    Lattice lat_n = BuildLattice(g, model, enc_n, pred);
    DiffArray rnnt_c = RnntLoss(lat_c, u->tokens);
    DiffArray rnnt_n = RnntLoss(lat_n, u->tokens);
    m.rnnt_causal += rnnt_c.item();
    m.rnnt_noncausal += rnnt_n.item();
    m.tokens += static_cast<int>(u->tokens.size());
    m.frames += lat_c.frames;
    DiffArray branch_c = rnnt_c, branch_n = rnnt_n;
    if (teacher && config.distill) {
      Tape ttape(false);
      Graph tg{ttape};
      DiffArray tenc_c = EncodeCausal(tg, *teacher, u->features);
      DiffArray tenc_n = EncodeNoncausal(tg, *teacher, tenc_c);
      DiffArray tpred = Predict(tg, *teacher, u->tokens);
      const Array t_c = BuildLattice(tg, *teacher, tenc_c, tpred, temp).log_probs.value();
      const Array t_n = BuildLattice(tg, *teacher, tenc_n, tpred, temp).log_probs.value();
      const int frames = lat_c.frames, labels = lat_c.labels;
      Lattice teach_c = MakeLattice(g.tape.Constant(t_c), frames, labels);
      Lattice teach_n = MakeLattice(g.tape.Constant(t_n), frames, labels);
      Lattice stu_c = temp == 1.0 ? lat_c : BuildLattice(g, model, enc_c, pred, temp);
      Lattice stu_n = temp == 1.0 ? lat_n : BuildLattice(g, model, enc_n, pred, temp);
      DiffArray kd_c = KdLoss(config.distill->kd.mode, teach_c, stu_c, u->tokens);
      DiffArray kd_n = KdLoss(config.distill->kd.mode, teach_n, stu_n, u->tokens);
      m.kd_causal += kd_c.item();
      m.kd_noncausal += kd_n.item();
      branch_c = TotalLoss(rnnt_c, kd_c, alpha * config.distill->causal_scale);
      branch_n = TotalLoss(rnnt_n, kd_n, alpha * config.distill->noncausal_scale);
    }
    terms.push_back(CascadedLoss(branch_c, branch_n, config.causal_weight));
  }
  const double n = static_cast<double>(batch.size());
  out.objective = WeightedSum(terms, std::vector<double>(batch.size(), 1.0 / n));
  m.loss = out.objective.item();
  m.rnnt_causal /= n;
  m.rnnt_noncausal /= n;
  m.kd_causal /= n;
  m.kd_noncausal /= n;
  return out;
}

AdamOptimizer::AdamOptimizer(CascadedModel &model, const TrainConfig &config)
    : model_(model), config_(config) {
  for (const Parameter &p : model.params().all()) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

double AdamOptimizer::Step(double learning_rate) {
  auto &params = model_.params().all();
  const double wd = config_.weight_decay;
  double sq = 0;
  for (Parameter &p : params) {
    if (p.frozen) continue;
    if (p.grad.shape() != p.value.shape()) p.ZeroGrad();
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      if (wd > 0) p.grad[i] += static_cast<Real>(wd * p.value[i]);
      sq += static_cast<double>(p.grad[i]) * p.grad[i];
    }
  }
  const double norm = std::sqrt(sq);
  const double clip = config_.grad_clip > 0 && norm > config_.grad_clip ? config_.grad_clip / norm : 1.0;
  ++t_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1 - std::pow(b1, t_), c2 = 1 - std::pow(b2, t_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter &p = params[k];
    if (p.frozen) continue;
    Array &m = m_[k], &v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = clip * p.grad[i];
      m[i] = static_cast<Real>(b1 * m[i] + (1 - b1) * g);
      v[i] = static_cast<Real>(b2 * v[i] + (1 - b2) * g * g);
      const double mh = m[i] / c1, vh = v[i] / c2;
      p.value[i] -= static_cast<Real>(learning_rate * mh / (std::sqrt(vh) + config_.adam_eps));
    }
  }
  return norm;
}

namespace {

// Endless stream of indices: one seeded permutation per epoch.
class BatchOrder {
 public:
  BatchOrder(std::size_t n, uint64_t seed) : n_(n), seed_(seed) { Refill(); }

  std::size_t Next() {
    if (pos_ == order_.size()) Refill();
    return order_[pos_++];
  }

 private:
  void Refill() {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    Rng rng = Rng::Derive(seed_, kOrderStream + epoch_++);
    for (std::size_t i = n_; i > 1; --i)
      std::swap(order_[i - 1], order_[static_cast<std::size_t>(rng.UniformInt(0, static_cast<int64_t>(i) - 1))]);
    pos_ = 0;
  }

  std::size_t n_;
  uint64_t seed_;
  uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

bool Finite(const StepMetrics &m) {
  return std::isfinite(m.loss) && std::isfinite(m.rnnt_causal) && std::isfinite(m.rnnt_noncausal);
}

}  // namespace

TrainResult Train(const TrainConfig &config, const std::vector<Utterance> &data,
                  TrainOptions options) {
  config.Validate();
  if (data.empty()) throw UsageError("train: dataset is empty");
  if (config.distill && !options.teacher)
    throw ConfigError("train: distill is configured but no teacher was given");
  if (options.teacher) {
    if (!config.distill) throw ConfigError("train: teacher given without a distill section");
    CheckTeacherCompatible(options.teacher->config(), config.model);
    options.teacher->params().SetFrozen(true);
  }
  for (const Utterance &u : data) {
    if (u.features.cols() != config.model.feature_dim)
      throw ConfigError("train: utterance " + u.id + " has feature width " +
                        std::to_string(u.features.cols()) + ", model expects " +
                        std::to_string(config.model.feature_dim));
    for (int y : u.tokens)
      if (y < 1 || y >= config.model.vocab_size)
        throw ConfigError("train: utterance " + u.id + " has label " + std::to_string(y) +
                          " outside the vocabulary");
  }

  TrainResult result;
  if (options.init) {
    if (!(options.init->config() == config.model))
      throw ConfigError("train: initial model does not match the config");
    result.model = std::move(options.init);
  } else {
    result.model = std::make_unique<CascadedModel>(config.model, config.seed);
  }
  CascadedModel &model = *result.model;
  AdamOptimizer opt(model, config);
  BatchOrder order(data.size(), config.seed);
  StepMetrics last;
  bool have_last = false;

  for (int step = 1; step <= config.steps; ++step) {
    std::vector<Utterance> augmented;
    std::vector<const Utterance *> batch;
    augmented.reserve(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
      const Utterance &u = data[order.Next()];
      if (!config.augment.enabled()) {
        batch.push_back(&u);
        continue;
      }
      Utterance a = u;
      const AugmentConfig &ac = config.augment;
      const uint64_t seed = Rng::Derive(config.seed, kAugmentStream + step).NextU64() + b;
      a.features = SpecAugment(u.features, ac.time_masks, std::min(ac.time_width, u.features.rows()),
                               ac.freq_masks, std::min(ac.freq_width, u.features.cols()), seed);
      augmented.push_back(std::move(a));
    }
    for (const Utterance &a : augmented) batch.push_back(&a);

    Tape tape;
    Rng drop_rng = Rng::Derive(config.seed, kDropoutStream + step);
    Graph g{tape, true, config.model.dropout, &drop_rng};
    BatchLoss bl = ComputeBatchLoss(g, model, batch, config, options.teacher);
    StepMetrics &m = bl.metrics;
    m.step = step;
    m.learning_rate = LearningRate(config, step);
    if (!Finite(m)) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": non-finite loss";
      if (have_last) msg << "; last finite metrics " << StepMetricsToJson(last).dump();
      throw DivergenceError(msg.str(), step);
    }
    model.params().ZeroGrads();
    tape.Backward(bl.objective);
    m.grad_norm = opt.Step(m.learning_rate);
    if (!std::isfinite(m.grad_norm)) {
      throw DivergenceError("training diverged at step " + std::to_string(step) +
                                ": non-finite gradient; last loss " + std::to_string(m.loss),
                            step);
    }
    last = m;
    have_last = true;
    result.metrics.push_back(m);
    if (options.sink) options.sink(m);
  }
  return result;
}

CASC_END_NAMESPACE
