// include/casc/decode/decode.h

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

#ifndef CASC_DECODE_DECODE_H_
#define CASC_DECODE_DECODE_H_

#include <memory>
#include <string>
#include <vector>

#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

enum class DecodeMode { kStreaming, kNonstreaming };

const char *DecodeModeName(DecodeMode mode);
DecodeMode ParseDecodeMode(const std::string &name);

constexpr int kMaxSymbolsPerFrame = 5;

struct DecodeResult {
  std::vector<int> tokens;  // no blanks
  double log_score = 0;     // <= 0
};

// Encoder output for a mode: causal rows, or the non-causal stack on top.
Array EncodeForMode(CascadedModel &model, const Array &features, DecodeMode mode);

// Frame-synchronous greedy search over encoder rows: at each frame emit the
// argmax label (lowest id on ties) until blank or kMaxSymbolsPerFrame
// labels; reaching the cap advances the frame without scoring a blank.
DecodeResult GreedySearch(CascadedModel &model, const Array &enc);
DecodeResult GreedyDecode(CascadedModel &model, const Array &features, DecodeMode mode);

// Frame-synchronous beam search with nested slots. Within a frame every
// round replaces each slot j < beam by the best successor, not already
// taken by a lower slot, of slots 0..j; a successor is a blank extension
// (which ends the frame), a label extension, or an ended hypothesis
// itself. Ranking: higher score, then fewer tokens, then lexicographically
// smaller tokens. No prefix merging. Slot 0 is the greedy path and slot j
// does not depend on the width, so beam == 1 reproduces GreedySearch and
// the best final score never decreases as the beam grows.
DecodeResult BeamSearch(CascadedModel &model, const Array &enc, int beam);
DecodeResult BeamDecode(CascadedModel &model, const Array &features, int beam, DecodeMode mode);

struct EditCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_length = 0;

  int errors() const { return substitutions + insertions + deletions; }
  // errors / max(1, ref_length)
  double rate() const;
  EditCounts &operator+=(const EditCounts &o);
};

// Unit-cost Levenshtein alignment of hyp against ref.
EditCounts Wer(const std::vector<int> &ref, const std::vector<int> &hyp);

// First pass fed frame by frame. Each time a full stacked frame becomes
// available the causal encoder is rerun on the whole prefix and greedy
// search advances over the new rows. Finish() flushes the padded tail; the
// second pass then runs the non-causal stack plus beam search.
class StreamingRecognizer {
 public:
  explicit StreamingRecognizer(CascadedModel &model);

  void AcceptFrames(const Array &frames);
  const std::vector<int> &partial() const { return tokens_; }
  // Ends the utterance and returns the first-pass result.
  DecodeResult Finish();
  // Second-pass result over the complete utterance.
  DecodeResult SecondPass(int beam);

 private:
  void DecodeRows(const Array &enc, int end_row);

  CascadedModel &model_;
  std::vector<Real> frames_;
  int num_frames_ = 0;
  int decoded_rows_ = 0;
  std::vector<int> tokens_;
  double score_ = 0;
  bool finished_ = false;
  Array causal_;
  struct State;
  std::shared_ptr<State> state_;
};

CASC_END_NAMESPACE

#endif  // CASC_DECODE_DECODE_H_
