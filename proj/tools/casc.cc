// tools/casc.cc

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

// Command-line front end: data generation, training, distillation,
// evaluation, latency benchmarking and parameter accounting.
//
// Every subcommand accepts --seed. Records go to the --report / --metrics
// file as JSON lines; human-readable tables go to stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "casc/base/errors.h"
#include "casc/exp/checkpoint.h"
#include "casc/exp/compress.h"
#include "casc/exp/config.h"
#include "casc/exp/dataset.h"
#include "casc/exp/evaluate.h"
#include "casc/exp/train.h"
#include "casc/model/model.h"

namespace {

using namespace casc;

// Config sources shared by train, distill, params and compress-config.
struct ConfigArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::optional<int> steps;
  std::optional<double> lr;
  std::optional<int> batch_size;

  void Add(CLI::App *app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--preset", preset, "named starting config (full, desk, toy)");
    app->add_option("--set", sets, "override, dotted.key=value (repeatable)");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--steps", steps, "optimizer steps");
    app->add_option("--lr", lr, "peak learning rate");
    app->add_option("--batch-size", batch_size, "utterances per step");
  }

  // Base config from --config, --preset, or `fallback`; flags win over
  // file keys.
  TrainConfig Resolve(const std::optional<TrainConfig> &fallback = std::nullopt) const {
    if (!config_path.empty() && !preset.empty()) throw UsageError("give --config or --preset, not both");
    TrainConfig c;
    if (!config_path.empty()) {
      c = LoadTrainConfig(config_path);
    } else if (!preset.empty()) {
      c = Preset(preset);
    } else if (fallback) {
      c = *fallback;
    } else {
      c = Preset("desk");
    }
    std::vector<std::string> all = sets;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    if (steps) all.push_back("steps=" + std::to_string(*steps));
    if (lr) all.push_back("learning_rate=" + nlohmann::json(*lr).dump());
    if (batch_size) all.push_back("batch_size=" + std::to_string(*batch_size));
    return ApplyOverrides(c, all);
  }
};

class RecordSink {
 public:
  explicit RecordSink(const std::string &path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file_) throw UsageError("cannot write " + path);
  }
  void Write(const nlohmann::ordered_json &j) {
    if (file_) *file_ << j.dump() << "\n";
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string Millions(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f M", n / 1e6);
  return buf;
}

void PrintBreakdown(const ModelConfig &m) {
  const ParamBreakdown b = CountParams(m);
  std::printf("%-20s %14s %10s\n", "group", "params", "");
  std::printf("%-20s %14zu %10s\n", "causal encoder", b.causal_encoder, Millions(b.causal_encoder).c_str());
  std::printf("%-20s %14zu %10s\n", "non-causal encoder", b.noncausal_encoder,
              Millions(b.noncausal_encoder).c_str());
  std::printf("%-20s %14zu %10s\n", "predictor", b.predictor, Millions(b.predictor).c_str());
  std::printf("%-20s %14zu %10s\n", "joint", b.joint, Millions(b.joint).c_str());
  std::printf("%-20s %14zu %10s\n", "decoder (pred+joint)", b.decoder(), Millions(b.decoder()).c_str());
  std::printf("%-20s %14zu %10s\n", "total", b.total, Millions(b.total).c_str());
}

nlohmann::ordered_json BreakdownJson(const ModelConfig &m) {
  const ParamBreakdown b = CountParams(m);
  nlohmann::ordered_json j;
  j["type"] = "params";
  j["decoder"] = DecoderKindName(m.decoder);
  j["causal_encoder"] = b.causal_encoder;
  j["noncausal_encoder"] = b.noncausal_encoder;
  j["predictor"] = b.predictor;
  j["joint"] = b.joint;
  j["decoder_total"] = b.decoder();
  j["total"] = b.total;
  return j;
}

std::vector<DecodeMode> ParseModes(const std::string &mode) {
  if (mode == "both") return {DecodeMode::kStreaming, DecodeMode::kNonstreaming};
  return {ParseDecodeMode(mode)};
}

// Runs training with metrics streamed to `metrics_path` and a short table
// on stdout; saves the checkpoint.
void RunTraining(const TrainConfig &config, const std::string &data_path, const std::string &out,
                 const std::string &metrics_path, CascadedModel *teacher) {
  const std::vector<Utterance> data = ReadDataset(data_path);
  RecordSink sink(metrics_path);
  const int every = std::max(1, config.steps / 10);
  std::printf("%8s %10s %12s %12s %10s %10s\n", "step", "lr", "rnnt_c", "rnnt_nc", "kd_c", "loss");
  TrainOptions opts;
  opts.teacher = teacher;
  opts.sink = [&](const StepMetrics &m) {
    sink.Write(StepMetricsToJson(m));
    if (m.step == 1 || m.step % every == 0 || m.step == config.steps)
      std::printf("%8d %10.3g %12.4f %12.4f %10.4f %10.4f\n", m.step, m.learning_rate, m.rnnt_causal,
                  m.rnnt_noncausal, m.kd_causal, m.loss);
  };
  TrainResult r = Train(config, data, std::move(opts));
  SaveCheckpoint(out, *r.model, config);
  std::printf("saved %s (%zu params)\n", out.c_str(), r.model->CountParams().total);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"casc: cascaded conformer transducer experiments"};
  app.require_subcommand(1);

  // data-gen
  auto *gen = app.add_subcommand("data-gen", "generate a synthetic dataset");
  DatasetSpec ds;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output stem; writes <stem>.jsonl and <stem>.f32")->required();
  gen->add_option("--count", ds.count, "utterances");
  gen->add_option("--min-tokens", ds.min_tokens, "shortest utterance in tokens");
  gen->add_option("--max-tokens", ds.max_tokens, "longest utterance in tokens");
  gen->add_option("--vocab", ds.task.vocab_size, "vocabulary size including blank");
  gen->add_option("--frames-per-token", ds.task.frames_per_token, "frames per token");
  gen->add_option("--feature-dim", ds.task.feature_dim, "feature width");
  gen->add_option("--noise", ds.task.noise_std, "feature noise standard deviation");
  gen->add_option("--prototype-seed", ds.task.prototype_seed, "seed of the token prototypes");
  gen->add_option("--seed", ds.seed, "seed of tokens and noise");
  gen->add_option("--prefix", ds.prefix, "utterance id prefix");

  // train
  auto *train = app.add_subcommand("train", "train a model from scratch");
  ConfigArgs train_cfg;
  train_cfg.Add(train);
  std::string train_data, train_out, train_metrics;
  train->add_option("--data", train_data, "training manifest")->required();
  train->add_option("--out", train_out, "checkpoint to write")->required();
  train->add_option("--metrics", train_metrics, "per-step JSON lines");

  // distill
  auto *distill = app.add_subcommand("distill", "train a student against a frozen teacher");
  ConfigArgs distill_cfg;
  distill_cfg.Add(distill);
  std::string teacher_path, distill_data, distill_out, distill_metrics, kd_mode;
  std::optional<double> compress_factor, alpha;
  std::string student_decoder;
  distill->add_option("--teacher", teacher_path, "teacher checkpoint")->required();
  distill->add_option("--data", distill_data, "training manifest")->required();
  distill->add_option("--out", distill_out, "student checkpoint to write")->required();
  distill->add_option("--metrics", distill_metrics, "per-step JSON lines");
  distill->add_option("--compress", compress_factor,
                      "derive the student from the teacher config at this factor (%)");
  distill->add_option("--decoder", student_decoder, "student decoder when deriving (lstm, tar)");
  distill->add_option("--alpha", alpha, "distillation weight");
  distill->add_option("--kd-mode", kd_mode, "full or efficient");

  // eval
  auto *eval = app.add_subcommand("eval", "decode a dataset and report WER");
  std::string eval_ckpt, eval_data, eval_report, eval_mode = "both";
  int eval_beam = 4;
  uint64_t eval_seed = 0;
  eval->add_option("--ckpt", eval_ckpt, "checkpoint")->required();
  eval->add_option("--data", eval_data, "evaluation manifest")->required();
  eval->add_option("--mode", eval_mode, "streaming, nonstreaming or both");
  eval->add_option("--beam", eval_beam, "beam width (1 = greedy)");
  eval->add_option("--report", eval_report, "JSON lines report");
  eval->add_option("--seed", eval_seed, "accepted for uniformity; decoding is deterministic");

  // bench
  auto *bench = app.add_subcommand("bench", "first- and second-pass latency");
  std::vector<std::string> bench_ckpts;
  std::string bench_data, bench_report;
  int bench_reps = 5, bench_beam = 4;
  uint64_t bench_seed = 0;
  bench->add_option("--ckpt", bench_ckpts, "checkpoint(s); the first is the baseline")->required();
  bench->add_option("--data", bench_data, "manifest")->required();
  bench->add_option("--reps", bench_reps, "timed repetitions (>= 3)");
  bench->add_option("--beam", bench_beam, "second-pass beam width");
  bench->add_option("--report", bench_report, "JSON lines report");
  bench->add_option("--seed", bench_seed, "accepted for uniformity; timing uses no randomness");

  // params
  auto *params = app.add_subcommand("params", "parameter accounting");
  ConfigArgs params_cfg;
  params_cfg.Add(params);
  std::string params_ckpt;
  params->add_option("--ckpt", params_ckpt, "count a checkpoint's model instead");

  // compress-config
  auto *comp = app.add_subcommand("compress-config", "derive a compressed student config");
  ConfigArgs comp_cfg;
  comp_cfg.Add(comp);
  double comp_factor = 50;
  std::string comp_decoder, comp_out;
  comp->add_option("--factor", comp_factor, "target reduction in percent, [0, 90)");
  comp->add_option("--decoder", comp_decoder, "switch the student decoder (lstm, tar)");
  comp->add_option("--out", comp_out, "write the student config here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const std::vector<Utterance> utts = GenerateFromSpec(ds);
      const std::string manifest = WriteDataset(gen_out, utts, ds);
      long frames = 0, tokens = 0;
      for (const Utterance &u : utts) {
        frames += u.num_frames();
        tokens += static_cast<long>(u.tokens.size());
      }
      std::printf("%-12s %8s %10s %10s %10s\n", "manifest", "utts", "frames", "tokens", "seconds");
      std::printf("%-12s %8zu %10ld %10ld %10.2f\n", manifest.c_str(), utts.size(), frames, tokens,
                  frames / 100.0);
    } else if (*train) {
      TrainConfig c = train_cfg.Resolve();
      if (c.distill) throw ConfigError("train: config has a distill section; use the distill subcommand");
      RunTraining(c, train_data, train_out, train_metrics, nullptr);
    } else if (*distill) {
      LoadedCheckpoint teacher = LoadCheckpoint(teacher_path);
      std::optional<TrainConfig> derived;
      if (compress_factor) {
        CompressOptions opts;
        if (!student_decoder.empty()) opts.decoder = ParseDecoderKind(student_decoder);
        CompressResult cr = CompressConfig(teacher.config, *compress_factor, opts);
        cr.config.distill.reset();
        derived = cr.config;
        std::printf("student: model_dim %d, causal_layers %d, %zu params (target %zu)\n",
                    cr.spec.model_dim, cr.spec.causal_layers, cr.spec.achieved_total,
                    cr.spec.target_total);
      }
      TrainConfig c = distill_cfg.Resolve(derived);
      DistillConfig d = c.distill.value_or(DistillConfig{});
      d.teacher = teacher_path;
      if (alpha) d.kd.alpha = *alpha;
      if (!kd_mode.empty()) d.kd.mode = ParseKdMode(kd_mode);
      c.distill = d;
      c.Validate();
      const uint32_t before = ParameterChecksum(*teacher.model);
      RunTraining(c, distill_data, distill_out, distill_metrics, teacher.model.get());
      const uint32_t after = ParameterChecksum(*teacher.model);
      std::printf("teacher checksum %08x before, %08x after\n", before, after);
      if (before != after) throw NumericalError("teacher parameters changed during distillation");
    } else if (*eval) {
      LoadedCheckpoint ck = LoadCheckpoint(eval_ckpt);
      const std::vector<Utterance> data = ReadDataset(eval_data);
      RecordSink sink(eval_report);
      std::printf("%-14s %5s %6s %6s %6s %6s %8s\n", "mode", "beam", "sub", "ins", "del", "ref", "WER%");
      for (DecodeMode mode : ParseModes(eval_mode)) {
        const EvalReport r = Evaluate(*ck.model, data, mode, eval_beam);
        for (const auto &rec : EvalReportRecords(r)) sink.Write(rec);
        std::printf("%-14s %5d %6d %6d %6d %6d %8.2f\n", DecodeModeName(mode), eval_beam,
                    r.corpus.substitutions, r.corpus.insertions, r.corpus.deletions,
                    r.corpus.ref_length, 100 * r.wer());
      }
    } else if (*bench) {
      const std::vector<Utterance> data = ReadDataset(bench_data);
      RecordSink sink(bench_report);
      std::vector<LatencyReport> reports;
      std::printf("%-28s %10s %12s %12s %10s %10s\n", "checkpoint", "params", "1st ms", "2nd ms",
                  "xRT 1st", "xRT 2nd");
      for (const std::string &path : bench_ckpts) {
        LoadedCheckpoint ck = LoadCheckpoint(path);
        LatencyReport r = BenchmarkLatency(*ck.model, data, bench_reps, bench_beam);
        for (auto rec : LatencyReportRecords(r, path)) {
          rec["params"] = ck.model->CountParams().total;
          sink.Write(rec);
        }
        std::printf("%-28s %10s %6.2f±%-5.2f %6.2f±%-5.2f %10.4f %10.4f\n", path.c_str(),
                    Millions(ck.model->CountParams().total).c_str(), r.first_pass.median_ms,
                    r.first_pass.mad_ms, r.second_pass.median_ms, r.second_pass.mad_ms,
                    r.first_pass.median_xrt, r.second_pass.median_xrt);
        reports.push_back(std::move(r));
      }
      std::printf("machine: %s\n", reports.front().machine.c_str());
      std::printf("(± is the median absolute deviation over utterances x repetitions)\n");
      for (std::size_t i = 1; i < reports.size(); ++i) {
        const double ratio = reports[i].second_pass.median_ms / reports[0].second_pass.median_ms;
        nlohmann::ordered_json j;
        j["type"] = "latency_comparison";
        j["baseline"] = bench_ckpts[0];
        j["candidate"] = bench_ckpts[i];
        j["second_pass_ratio"] = ratio;
        j["second_pass_reduction"] = 1 - ratio;
        j["reference_reduction"] = kReferenceLatencyReduction;
        sink.Write(j);
        std::printf("%s vs baseline: second-pass reduction %.1f%% (reference device: %.0f%%)\n",
                    bench_ckpts[i].c_str(), 100 * (1 - ratio), 100 * kReferenceLatencyReduction);
      }
    } else if (*params) {
      ModelConfig m;
      if (!params_ckpt.empty()) {
        m = LoadCheckpoint(params_ckpt).config.model;
      } else {
        m = params_cfg.Resolve().model;
      }
      PrintBreakdown(m);
      std::cout << BreakdownJson(m).dump() << "\n";
    } else if (*comp) {
      const TrainConfig base = comp_cfg.Resolve();
      CompressOptions opts;
      if (!comp_decoder.empty()) opts.decoder = ParseDecoderKind(comp_decoder);
      const CompressResult r = CompressConfig(base, comp_factor, opts);
      const CompressionSpec &s = r.spec;
      std::printf("%8s %12s %12s %12s %9s %6s %6s %6s %6s %8s\n", "factor%", "base", "target",
                  "achieved", "err%", "D", "Lc", "Lnc", "E", "stage");
      std::printf("%8.1f %12zu %12zu %12zu %9.2f %6d %6d %6d %6d %8s\n", s.factor_percent,
                  s.base_total, s.target_total, s.achieved_total, 100 * s.relative_error(),
                  s.model_dim, s.causal_layers, s.noncausal_layers, s.embedding_dim,
                  s.stage.c_str());
      if (!comp_out.empty()) {
        std::ofstream out(comp_out, std::ios::trunc);
        out << TrainConfigToString(r.config);
        if (!out) throw UsageError("cannot write " + comp_out);
      }
    }
  } catch (const DivergenceError &e) {
    std::fprintf(stderr, "error: %s (step %ld)\n", e.what(), e.step());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
