#include "rfsum/inference.hpp"

#include <algorithm>
#include <cmath>

#include "rfsum/errors.hpp"

namespace rfsum {

namespace {

// Lexicographic comparison of parent-sequence-plus-one-token without
// materializing the extended sequence.
bool extension_less(const std::vector<int>& a_parent, int a_tok,
                    const std::vector<int>& b_parent, int b_tok) {
  std::size_t n = std::min(a_parent.size(), b_parent.size());
  for (std::size_t i = 0; i < n; ++i)
    if (a_parent[i] != b_parent[i]) return a_parent[i] < b_parent[i];
  int a_next = a_parent.size() > n ? a_parent[n] : a_tok;
  int b_next = b_parent.size() > n ? b_parent[n] : b_tok;
  if (a_next != b_next) return a_next < b_next;
  // Same up to the shorter extension's end.
  return a_parent.size() + 1 < b_parent.size() + 1;
}

}  // namespace

std::vector<int> greedy_decode(Stepper& st, int max_len) {
  if (max_len < 1) throw InvalidArgument("max_len must be positive");
  std::vector<int> out;
  auto state = st.initial_state();
  int prev = st.sos_id();
  for (int t = 0; t < max_len; ++t) {
    auto step = st.step(state, prev);
    int best = 0;
    for (int j = 1; j < static_cast<int>(step.dist.size()); ++j)
      if (step.dist[j] > step.dist[best]) best = j;
    out.push_back(best);
    if (best == st.eos_id()) break;
    state = step.state;
    prev = best;
  }
  return out;
}

std::vector<Hypothesis> beam_search(Stepper& st, int beam, int max_len) {
  if (beam < 1) throw InvalidArgument("beam width must be positive");
  if (max_len < 1) throw InvalidArgument("max_len must be positive");

  struct Live {
    std::vector<int> tokens;
    double logp = 0.0;
    std::shared_ptr<void> state;
  };
  std::vector<Live> live;
  live.push_back({{}, 0.0, st.initial_state()});

  std::vector<Hypothesis> pool;
  int width = beam;

  for (int t = 0; t < max_len && !live.empty(); ++t) {
    struct Cand {
      int parent;
      int token;
      double logp;
    };
    std::vector<Cand> cands;
    std::vector<std::shared_ptr<void>> next_states(live.size());

    for (std::size_t p = 0; p < live.size(); ++p) {
      int prev = live[p].tokens.empty() ? st.sos_id() : live[p].tokens.back();
      auto out = st.step(live[p].state, prev);
      next_states[p] = out.state;
      // Within one parent, only the top `width` extensions can survive the
      // global cut, and prob order equals log-prob order.
      std::vector<int> ids(out.dist.size());
      for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = static_cast<int>(j);
      std::size_t keep = std::min<std::size_t>(width, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + keep, ids.end(),
                        [&](int a, int b) {
                          if (out.dist[a] != out.dist[b])
                            return out.dist[a] > out.dist[b];
                          return a < b;
                        });
      for (std::size_t j = 0; j < keep; ++j)
        cands.push_back({static_cast<int>(p), ids[j],
                         live[p].logp + std::log(out.dist[ids[j]])});
    }

    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      return extension_less(live[a.parent].tokens, a.token,
                            live[b.parent].tokens, b.token);
    });
    if (static_cast<int>(cands.size()) > width) cands.resize(width);

    std::vector<Live> next;
    for (const auto& c : cands) {
      std::vector<int> tokens = live[c.parent].tokens;
      tokens.push_back(c.token);
      if (c.token == st.eos_id()) {
        pool.push_back({std::move(tokens), c.logp, true});
        width -= 1;  // a finished hypothesis keeps its slot
      } else {
        next.push_back({std::move(tokens), c.logp, next_states[c.parent]});
      }
    }
    if (static_cast<int>(next.size()) > width)
      next.resize(width);  // shrink to the remaining slots
    live = std::move(next);
  }

  // Length-capped leftovers compete as unfinished hypotheses.
  for (auto& h : live) pool.push_back({std::move(h.tokens), h.logp, false});

  std::sort(pool.begin(), pool.end(), [](const Hypothesis& a, const Hypothesis& b) {
    double sa = a.score(), sb = b.score();
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
  });
  return pool;
}

ModelStepper::ModelStepper(const Model& m, const Report& r) : m_(m) {
  g_.set_grad_enabled(false);
  ex_ = encode_example(g_, m, r);
}

int ModelStepper::dist_size() const { return ex_.ext.size(); }
int ModelStepper::sos_id() const { return Vocabulary::kSos; }
int ModelStepper::eos_id() const { return Vocabulary::kEos; }

namespace {
struct DecodeState {
  TensorRef s, c;
};
}  // namespace

std::shared_ptr<void> ModelStepper::initial_state() {
  return std::make_shared<DecodeState>(DecodeState{ex_.s0, ex_.c0});
}

Stepper::StepOut ModelStepper::step(const std::shared_ptr<void>& state,
                                    int prev) {
  auto st = std::static_pointer_cast<DecodeState>(state);
  DecoderStep out = decode_step(g_, m_, ex_, st->s, st->c, prev);
  return {out.dist->v,
          std::make_shared<DecodeState>(DecodeState{out.s, out.c})};
}

Tokens resolve_tokens(const ExtendedVocab& ext, const std::vector<int>& ids,
                      bool strip_structural) {
  Tokens out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (strip_structural &&
        (id == Vocabulary::kPad || id == Vocabulary::kSos ||
         id == Vocabulary::kEos))
      continue;
    out.push_back(ext.token(id));
  }
  return out;
}

Tokens summarize_tokens(const Model& m, const Report& r, int beam,
                        int max_len) {
  ModelStepper st(m, r);
  auto hyps = beam_search(st, beam, max_len);
  if (hyps.empty()) return {};
  return resolve_tokens(st.ext(), hyps.front().tokens);
}

std::string summarize(const Model& m, const Report& r, int beam, int max_len) {
  return detokenize(summarize_tokens(m, r, beam, max_len));
}

}  // namespace rfsum
