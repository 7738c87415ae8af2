#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rfsum/model.hpp"

namespace rfsum {

// Anything that can produce next-token distributions step by step. The search
// code only speaks this interface, so tiny hand-built models can exercise it
// exhaustively.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual int dist_size() const = 0;
  virtual int sos_id() const = 0;
  virtual int eos_id() const = 0;
  virtual std::shared_ptr<void> initial_state() = 0;

  struct StepOut {
    std::vector<double> dist;      // probabilities over dist_size() tokens
    std::shared_ptr<void> state;   // recurrent state after consuming prev
  };
  // prev is the previously emitted token (sos_id on the first call). The
  // returned state is shared by all continuations of this hypothesis.
  virtual StepOut step(const std::shared_ptr<void>& state, int prev) = 0;
};

struct Hypothesis {
  std::vector<int> tokens;  // emitted tokens; ends with eos iff finished
  double logp = 0.0;        // accumulated log probability
  bool finished = false;
  // Length-normalized score used for final ranking; the eos counts toward
  // the length, an unfinished (length-capped) hypothesis has no eos.
  double score() const {
    return logp / static_cast<double>(tokens.empty() ? 1 : tokens.size());
  }
};

// Argmax decoding; ties pick the smallest token id. Stops after eos or
// max_len tokens. The eos, when emitted, is included in the result.
std::vector<int> greedy_decode(Stepper& st, int max_len);

// Width-w best-first search. Each step ranks all one-token extensions of the
// live hypotheses by accumulated log probability (ties: lexicographically
// smaller token sequence) and keeps the best w. An extension ending in eos
// retires to the finished pool and permanently consumes one of the w slots,
// so the live beam shrinks as hypotheses finish. Hypotheses still live at
// max_len join the pool unfinished. The returned list is every pooled
// hypothesis ranked by score() (ties again lexicographic), best first.
std::vector<Hypothesis> beam_search(Stepper& st, int beam, int max_len);

// Runs the full model over one source example without building a tape.
class ModelStepper : public Stepper {
 public:
  ModelStepper(const Model& m, const Report& r);
  int dist_size() const override;
  int sos_id() const override;
  int eos_id() const override;
  std::shared_ptr<void> initial_state() override;
  StepOut step(const std::shared_ptr<void>& state, int prev) override;
  const ExtendedVocab& ext() const { return ex_.ext; }

 private:
  const Model& m_;
  Graph g_;
  Encoded ex_;
};

// Maps extended ids back to surface tokens; <pad>/<sos>/<eos> are dropped
// when strip_structural is set. Copied out-of-vocabulary ids resolve to the
// source surface form, never to <unk>.
Tokens resolve_tokens(const ExtendedVocab& ext, const std::vector<int>& ids,
                      bool strip_structural = true);

// Beam-searched impression for one report, as tokens and as a single line.
Tokens summarize_tokens(const Model& m, const Report& r, int beam = 5,
                        int max_len = 100);
std::string summarize(const Model& m, const Report& r, int beam = 5,
                      int max_len = 100);

}  // namespace rfsum
