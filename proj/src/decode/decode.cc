// src/decode/decode.cc

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

#include "casc/decode/decode.h"

#include <algorithm>
#include <memory>

#include "casc/base/errors.h"
#include "casc/loss/transducer.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"

CASC_BEGIN_NAMESPACE

const char *DecodeModeName(DecodeMode mode) {
  return mode == DecodeMode::kStreaming ? "streaming" : "nonstreaming";
}

DecodeMode ParseDecodeMode(const std::string &name) {
  if (name == "streaming" || name == "s") return DecodeMode::kStreaming;
  if (name == "nonstreaming" || name == "ns") return DecodeMode::kNonstreaming;
  throw UsageError("mode must be \"streaming\" or \"nonstreaming\", got \"" + name + "\"");
}

Array EncodeForMode(CascadedModel &model, const Array &features, DecodeMode mode) {
  Tape tape(false);
  Graph g{tape};
  DiffArray enc = EncodeCausal(g, model, features);
  if (mode == DecodeMode::kNonstreaming) enc = EncodeNoncausal(g, model, enc);
  return enc.value();
}

namespace {

// Greedy emissions for one encoder frame; updates state, tokens and score.
void GreedyFrame(CascadedModel &model, const Real *proj_row, PredictorState &state,
                 std::vector<int> &tokens, double &score) {
  for (int n = 0; n < kMaxSymbolsPerFrame; ++n) {
    const std::vector<double> lp = JointLogProbs(model, proj_row, state);
    const int best = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    score += lp[best];
    if (best == kBlank) return;
    tokens.push_back(best);
    state = AdvancePredictor(model, state, best);
  }
}

}  // namespace

DecodeResult GreedySearch(CascadedModel &model, const Array &enc) {
  const Array proj = ProjectEncoder(model, enc);
  PredictorState state = InitialPredictorState(model);
  DecodeResult r;
  for (int t = 0; t < proj.rows(); ++t) GreedyFrame(model, proj.row(t), state, r.tokens, r.log_score);
  return r;
}

DecodeResult GreedyDecode(CascadedModel &model, const Array &features, DecodeMode mode) {
  return GreedySearch(model, EncodeForMode(model, features, mode));
}

namespace {

struct Hyp {
  std::vector<int> tokens;
  double score = 0;
  std::shared_ptr<const PredictorState> state;
  int emitted = 0;       // labels emitted in the current frame
  int pending = -1;      // label whose predictor step is still to be taken
  bool ended = false;    // has left the current frame
};

// True when a ranks strictly before b.
bool Better(const Hyp &a, const Hyp &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

// Successors of a slot within one round: itself once it has ended (or hit
// the label cap), otherwise its blank extension and every label extension.
void AppendChildren(CascadedModel &model, const Real *proj_row, Hyp &h,
                    std::vector<Hyp> &out) {
  if (h.pending >= 0) {
    h.state = std::make_shared<PredictorState>(AdvancePredictor(model, *h.state, h.pending));
    h.pending = -1;
  }
  if (h.ended || h.emitted == kMaxSymbolsPerFrame) {
    Hyp self = h;
    self.ended = true;
    out.push_back(std::move(self));
    return;
  }
  const std::vector<double> lp = JointLogProbs(model, proj_row, *h.state);
  Hyp b = h;
  b.score += lp[kBlank];
  b.ended = true;
  out.push_back(std::move(b));
  for (int k = 1; k < static_cast<int>(lp.size()); ++k) {
    Hyp e = h;
    e.tokens.push_back(k);
    e.score += lp[k];
    e.emitted += 1;
    e.pending = k;
    out.push_back(std::move(e));
  }
}

}  // namespace

DecodeResult BeamSearch(CascadedModel &model, const Array &enc, int beam) {
  if (beam < 1) throw UsageError("BeamSearch: beam must be at least 1");
  const Array proj = ProjectEncoder(model, enc);
  std::vector<Hyp> slots;
  slots.push_back({{}, 0.0, std::make_shared<PredictorState>(InitialPredictorState(model))});
  for (int t = 0; t < proj.rows(); ++t) {
    for (Hyp &h : slots) {
      h.emitted = 0;
      h.ended = false;
    }
    bool any_active = true;
    while (any_active) {
      // Slot j takes the best candidate, not yet taken by slots < j, among
      // the successors of slots 0..j. Slot j therefore never depends on the
      // beam width.
      std::vector<Hyp> candidates;
      std::vector<bool> taken;
      std::vector<Hyp> next;
      for (std::size_t j = 0; j < static_cast<std::size_t>(beam); ++j) {
        if (j < slots.size()) AppendChildren(model, proj.row(t), slots[j], candidates);
        taken.resize(candidates.size(), false);
        int pick = -1;
        for (int c = 0; c < static_cast<int>(candidates.size()); ++c) {
          if (!taken[c] && (pick < 0 || Better(candidates[c], candidates[pick]))) pick = c;
        }
        if (pick < 0) break;
        taken[pick] = true;
        next.push_back(candidates[pick]);
      }
      slots = std::move(next);
      any_active = false;
      for (const Hyp &h : slots) any_active = any_active || !h.ended;
    }
  }
  const Hyp &best = *std::min_element(slots.begin(), slots.end(), Better);
  return {best.tokens, best.score};
}

DecodeResult BeamDecode(CascadedModel &model, const Array &features, int beam, DecodeMode mode) {
  if (beam < 1) throw UsageError("BeamDecode: beam must be at least 1");
  return BeamSearch(model, EncodeForMode(model, features, mode), beam);
}

double EditCounts::rate() const {
  return static_cast<double>(errors()) / std::max(1, ref_length);
}

EditCounts &EditCounts::operator+=(const EditCounts &o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_length += o.ref_length;
  return *this;
}

EditCounts Wer(const std::vector<int> &ref, const std::vector<int> &hyp) {
  const int n = static_cast<int>(ref.size()), m = static_cast<int>(hyp.size());
  // d[i][j]: distance between ref[:i] and hyp[:j].
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (int i = 0; i <= n; ++i) d[i][0] = i;
  for (int j = 0; j <= m; ++j) d[0][j] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  EditCounts c;
  c.ref_length = n;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      c.substitutions += ref[i - 1] != hyp[j - 1];
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

struct StreamingRecognizer::State {
  PredictorState predictor;
};

StreamingRecognizer::StreamingRecognizer(CascadedModel &model)
    : model_(model), state_(std::make_shared<State>(State{InitialPredictorState(model)})) {}

void StreamingRecognizer::DecodeRows(const Array &enc, int end_row) {
  const Array proj = ProjectEncoder(model_, enc);
  for (int t = decoded_rows_; t < end_row; ++t)
    GreedyFrame(model_, proj.row(t), state_->predictor, tokens_, score_);
  decoded_rows_ = std::max(decoded_rows_, end_row);
}

void StreamingRecognizer::AcceptFrames(const Array &frames) {
  if (finished_) throw UsageError("StreamingRecognizer: utterance already finished");
  const int f = model_.config().feature_dim;
  if (frames.rows() == 0) return;
  if (frames.cols() != f) throw UsageError("StreamingRecognizer: feature dim mismatch");
  frames_.insert(frames_.end(), frames.vec().begin(), frames.vec().end());
  num_frames_ += frames.rows();
  const int complete = num_frames_ / model_.config().subsample_factor;
  if (complete <= decoded_rows_) return;
  const int used = complete * model_.config().subsample_factor;
  Array prefix(Shape{used, f},
               std::vector<Real>(frames_.begin(), frames_.begin() + static_cast<long>(used) * f));
  Tape tape(false);
  Array enc = EncodeCausal(Graph{tape}, model_, prefix).value();
  DecodeRows(enc, complete);
}

DecodeResult StreamingRecognizer::Finish() {
  if (num_frames_ == 0) throw UsageError("StreamingRecognizer: no frames");
  if (!finished_) {
    Tape tape(false);
    causal_ = EncodeCausal(Graph{tape}, model_,
                           Array(Shape{num_frames_, model_.config().feature_dim}, frames_))
                  .value();
    DecodeRows(causal_, causal_.rows());
    finished_ = true;
  }
  return {tokens_, score_};
}

DecodeResult StreamingRecognizer::SecondPass(int beam) {
  Finish();
  Tape tape(false);
  Array enc = EncodeNoncausal(Graph{tape}, model_, tape.Constant(causal_)).value();
  return BeamSearch(model_, enc, beam);
}

CASC_END_NAMESPACE
