// src/exp/evaluate.cc

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

#include "casc/exp/evaluate.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "casc/base/errors.h"
#include "casc/model/encoder.h"
#include "casc/simd/kernels.h"

CASC_BEGIN_NAMESPACE

EvalReport Evaluate(CascadedModel &model, const std::vector<Utterance> &data, DecodeMode mode,
                    int beam) {
  if (beam < 1) throw UsageError("evaluate: beam must be at least 1");
  EvalReport r;
  r.mode = mode;
  r.beam = beam;
  for (const Utterance &u : data) {
    const DecodeResult d =
        beam == 1 ? GreedyDecode(model, u.features, mode) : BeamDecode(model, u.features, beam, mode);
    UtteranceResult ur{u.id, u.tokens, d.tokens, Wer(u.tokens, d.tokens), d.log_score};
    r.corpus += ur.counts;
    r.utterances.push_back(std::move(ur));
  }
  return r;
}

namespace {

nlohmann::ordered_json CountsJson(const EditCounts &c) {
  nlohmann::ordered_json j;
  j["substitutions"] = c.substitutions;
  j["insertions"] = c.insertions;
  j["deletions"] = c.deletions;
  j["ref_length"] = c.ref_length;
  j["errors"] = c.errors();
  j["wer"] = c.rate();
  return j;
}

}  // namespace

std::vector<nlohmann::ordered_json> EvalReportRecords(const EvalReport &report) {
  std::vector<nlohmann::ordered_json> out;
  for (const UtteranceResult &u : report.utterances) {
    nlohmann::ordered_json j;
    j["type"] = "utterance";
    j["id"] = u.id;
    j["mode"] = DecodeModeName(report.mode);
    j["beam"] = report.beam;
    j["reference"] = u.reference;
    j["hypothesis"] = u.hypothesis;
    j["log_score"] = u.log_score;
    j.update(CountsJson(u.counts));
    out.push_back(std::move(j));
  }
  nlohmann::ordered_json c;
  c["type"] = "corpus";
  c["mode"] = DecodeModeName(report.mode);
  c["beam"] = report.beam;
  c["utterances"] = report.utterances.size();
  c.update(CountsJson(report.corpus));
  out.push_back(std::move(c));
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) throw UsageError("Median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double MedianAbsDeviation(const std::vector<double> &v) {
  const double m = Median(v);
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - m);
  return Median(dev);
}

std::string MachineDescriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const std::size_t colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::string compiler = "unknown compiler";
#if defined(__clang__)
  compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  compiler = "gcc " __VERSION__;
#endif
  return cpu + "; " + std::to_string(std::thread::hardware_concurrency()) + " hw threads; " +
         compiler + "; kernels " + simd::ActiveKernels().name;
}

LatencyReport BenchmarkLatency(CascadedModel &model, const std::vector<Utterance> &data,
                               int repetitions, int beam) {
  if (repetitions < 3) throw UsageError("bench: repetitions must be at least 3");
  if (data.empty()) throw UsageError("bench: dataset is empty");
  if (beam < 1) throw UsageError("bench: beam must be at least 1");
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

  auto first_pass = [&](const Utterance &u, Array &causal) {
    Tape tape(false);
    causal = EncodeCausal(Graph{tape}, model, u.features).value();
    return GreedySearch(model, causal);
  };
  auto second_pass = [&](const Array &causal) {
    Tape tape(false);
    Array enc = EncodeNoncausal(Graph{tape}, model, tape.Constant(causal)).value();
    return BeamSearch(model, enc, beam);
  };

  {
    Array causal;
    first_pass(data.front(), causal);
    second_pass(causal);
  }
  LatencyReport r;
  r.repetitions = repetitions;
  r.beam = beam;
  r.utterances = static_cast<int>(data.size());
  r.machine = MachineDescriptor();
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const Utterance &u : data) {
      Array causal;
      const auto t0 = Clock::now();
      first_pass(u, causal);
      const auto t1 = Clock::now();
      second_pass(causal);
      const auto t2 = Clock::now();
      const double dur_ms = 1000.0 * u.duration_seconds();
      r.first_ms.push_back(ms(t1 - t0));
      r.second_ms.push_back(ms(t2 - t1));
      r.first_xrt.push_back(r.first_ms.back() / dur_ms);
      r.second_xrt.push_back(r.second_ms.back() / dur_ms);
    }
  }
  auto summarise = [](const std::vector<double> &t, const std::vector<double> &x) {
    return LatencySummary{Median(t), MedianAbsDeviation(t), Median(x), MedianAbsDeviation(x)};
  };
  r.first_pass = summarise(r.first_ms, r.first_xrt);
  r.second_pass = summarise(r.second_ms, r.second_xrt);
  return r;
}

std::vector<nlohmann::ordered_json> LatencyReportRecords(const LatencyReport &report,
                                                         const std::string &label) {
  nlohmann::ordered_json j;
  j["type"] = "latency";
  j["label"] = label;
  j["repetitions"] = report.repetitions;
  j["utterances"] = report.utterances;
  j["beam"] = report.beam;
  auto pass = [](const LatencySummary &s) {
    nlohmann::ordered_json p;
    p["median_ms"] = s.median_ms;
    p["mad_ms"] = s.mad_ms;
    p["median_xrt"] = s.median_xrt;
    p["mad_xrt"] = s.mad_xrt;
    return p;
  };
  j["first_pass"] = pass(report.first_pass);
  j["second_pass"] = pass(report.second_pass);
  j["machine"] = report.machine;
  return {j};
}

CASC_END_NAMESPACE
