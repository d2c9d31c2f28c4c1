// include/casc/exp/evaluate.h

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

#ifndef CASC_EXP_EVALUATE_H_
#define CASC_EXP_EVALUATE_H_

#include <string>
#include <vector>

#include "casc/data/synth.h"
#include "casc/decode/decode.h"

#include "json.hpp"

CASC_BEGIN_NAMESPACE

struct UtteranceResult {
  std::string id;
  std::vector<int> reference;
  std::vector<int> hypothesis;
  EditCounts counts;
  double log_score = 0;
};

struct EvalReport {
  DecodeMode mode = DecodeMode::kNonstreaming;
  int beam = 1;
  std::vector<UtteranceResult> utterances;
  EditCounts corpus;

  double wer() const { return corpus.rate(); }
};

// Decodes every utterance (greedy when beam == 1, beam search otherwise).
EvalReport Evaluate(CascadedModel &model, const std::vector<Utterance> &data, DecodeMode mode,
                    int beam);

// Report records: one {"type":"utterance",...} per utterance, then one
// {"type":"corpus",...}.
std::vector<nlohmann::ordered_json> EvalReportRecords(const EvalReport &report);

// Latency of the two decoding passes.
//   first pass:  causal encoder + greedy search over the whole utterance
//   second pass: non-causal encoder on the causal output + beam search
// Times are wall-clock milliseconds per utterance; xRT is time over
// utterance duration. Medians and median absolute deviations run over all
// (utterance, repetition) samples.
struct LatencySummary {
  double median_ms = 0;
  double mad_ms = 0;
  double median_xrt = 0;
  double mad_xrt = 0;
};

struct LatencyReport {
  int repetitions = 0;
  int beam = 4;
  int utterances = 0;
  LatencySummary first_pass;
  LatencySummary second_pass;
  std::vector<double> first_ms, second_ms;   // per sample
  std::vector<double> first_xrt, second_xrt;
  std::string machine;
};

// Requires repetitions >= 3 and a non-empty dataset (UsageError). One
// untimed warm-up decode precedes the timed repetitions; timing runs on
// the calling thread only.
LatencyReport BenchmarkLatency(CascadedModel &model, const std::vector<Utterance> &data,
                               int repetitions, int beam = 4);

// Host CPU model, core count, compiler and active SIMD kernels.
std::string MachineDescriptor();

double Median(std::vector<double> v);
// Median absolute deviation from the median.
double MedianAbsDeviation(const std::vector<double> &v);

// Second-pass latency reduction reported for a 50% compressed model on
// the original target device (128 ms -> 89 ms).
constexpr double kReferenceLatencyReduction = 0.30;

std::vector<nlohmann::ordered_json> LatencyReportRecords(const LatencyReport &report,
                                                         const std::string &label);

CASC_END_NAMESPACE

#endif  // CASC_EXP_EVALUATE_H_
