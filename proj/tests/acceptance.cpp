// Acceptance gate for the summarization engine. Each criterion prints one
// PASS/FAIL line; the process exits nonzero if any fail. Criteria carry their
// own runtime ceilings, enforced here. Run with criterion numbers as
// arguments to execute a subset (e.g. "acceptance 4 5").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rfsum/baselines.hpp"
#include "rfsum/corpus.hpp"
#include "rfsum/decoder.hpp"
#include "rfsum/inference.hpp"
#include "rfsum/model.hpp"
#include "rfsum/rouge.hpp"
#include "rfsum/rng.hpp"
#include "rfsum/training.hpp"
#include "toy_stepper.hpp"

using namespace rfsum;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& out, const std::string& why) {
  out.pass = false;
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += why;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradient fidelity on the full pipeline: both encoders -> background
//    vector -> 3 gated decode steps -> NLL, at hidden 6 / vocab 12.
// ---------------------------------------------------------------------------
Outcome c1_gradient_fidelity() {
  Outcome out;
  double worst = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    Vocabulary vocab;
    for (int i = 0; i < 8; ++i) vocab.add("w" + std::to_string(i));  // size 12

    ModelConfig cfg;
    cfg.emb_dim = 4;
    cfg.enc_hidden = 3;  // bidirectional state = decoder hidden = 6
    cfg.enc_layers = 2;
    cfg.dec_hidden = 6;
    cfg.attn_dim = 5;
    cfg.proj_dim = 5;
    cfg.variant = Variant::BackgroundGated;
    Model m = init_model(cfg, vocab, static_cast<uint64_t>(seed));

    Rng rng(1000 + seed);
    auto draw = [&](int n) {
      Tokens t;
      for (int i = 0; i < n; ++i) t.push_back("w" + std::to_string(rng.index(8)));
      return t;
    };
    Report r;
    r.id = "g";
    r.background = draw(3);
    r.findings = draw(4);
    r.impression = draw(2);  // two tokens + <eos> = 3 decode steps

    std::vector<TensorRef> params;
    for (auto& [name, t] : m.named_params()) params.push_back(t);
    auto res = testutil::check_gradients(
        params, [&](Graph& g) { return example_loss(g, m, r).loss; }, 1e-5);
    worst = std::max(worst, res.max_rel_err);
    if (res.max_rel_err >= 1e-4) {
      fail(out, "seed " + std::to_string(seed) + ": " + res.worst);
      break;
    }
  }
  out.detail = fmt("max rel err %.3g over 20 seeds", worst) +
               (out.pass ? "" : " | " + out.detail);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Distribution laws: mixture sums to 1 within 1e-9 on 1000 random
//    configurations; forced p_gen endpoints collapse exactly.
// ---------------------------------------------------------------------------
Outcome c2_distribution_laws() {
  Outcome out;
  double worst_gap = 0.0;
  for (int trial = 1; trial <= 1000 && out.pass; ++trial) {
    Rng rng(trial);
    int h = 2 + static_cast<int>(rng.index(4));
    int e = 2 + static_cast<int>(rng.index(3));
    int state = 2 * (1 + static_cast<int>(rng.index(3)));
    int a = 2 + static_cast<int>(rng.index(3));
    int proj = 2 + static_cast<int>(rng.index(3));
    int n = 1 + static_cast<int>(rng.index(6));
    int vocab_words = 2 + static_cast<int>(rng.index(7));

    Vocabulary base;
    for (int i = 0; i < vocab_words; ++i) base.add("w" + std::to_string(i));
    Tokens src;
    for (int i = 0; i < n; ++i) {
      src.push_back(rng.real() < 0.3 ? "oov" + std::to_string(i)
                                     : "w" + std::to_string(rng.index(vocab_words)));
    }
    std::vector<int> src_ids;
    ExtendedVocab ext = ExtendedVocab::build(base, src, &src_ids);

    bool gated = trial % 2 == 0;
    DecoderParams p = init_decoder(h, e, state, proj, base.size(), gated, rng);
    AttnParams attn = init_attention(state, h, a, rng);

    std::vector<double> vals(static_cast<size_t>(n) * state);
    for (auto& x : vals) x = rng.uniform(-1.0, 1.0);
    EncoderOutput enc;
    enc.states = make_tensor({n, state}, vals, false);
    std::vector<double> fin(vals.end() - state, vals.end());
    enc.final = make_tensor({state}, fin, false);

    auto vec = [&](int d) {
      std::vector<double> v(d);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      return make_tensor({d}, v, false);
    };

    Graph g;
    auto s0 = vec(h), c0 = vec(h), y = vec(e);
    DecoderStep step =
        gated ? step_background(g, s0, c0, y, vec(state), enc, attn, p, src_ids, ext)
              : step_plain(g, s0, c0, y, enc, attn, p, src_ids, ext);
    double sum = 0.0;
    for (double x : step.dist->v) sum += x;
    worst_gap = std::max(worst_gap, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) >= 1e-9) {
      fail(out, "trial " + std::to_string(trial) + fmt(": sum %.12f", sum));
      break;
    }

    // Endpoint collapse at the mixture itself, with exact p_gen values.
    std::vector<double> pv(base.size());
    double pv_sum = 0.0;
    for (auto& x : pv) pv_sum += (x = rng.uniform(0.01, 1.0));
    for (auto& x : pv) x /= pv_sum;
    std::vector<double> aw(n);
    double aw_sum = 0.0;
    for (auto& x : aw) aw_sum += (x = rng.uniform(0.01, 1.0));
    for (auto& x : aw) x /= aw_sum;

    auto pv_t = make_tensor({base.size()}, pv, false);
    auto aw_t = make_tensor({n}, aw, false);
    auto gen_all = mixture(g, make_tensor({1}, {1.0}, false), pv_t, aw_t, src_ids, ext);
    for (int i = 0; i < base.size(); ++i) {
      if (gen_all->v[i] != pv[i]) fail(out, "p_gen=1 vocab slot changed");
    }
    for (int i = base.size(); i < ext.size(); ++i) {
      if (gen_all->v[i] != 0.0) fail(out, "p_gen=1 leaked copy mass");
    }
    auto copy_all = mixture(g, make_tensor({1}, {0.0}, false), pv_t, aw_t, src_ids, ext);
    std::vector<double> scatter(ext.size(), 0.0);
    for (int pos = 0; pos < n; ++pos) scatter[src_ids[pos]] += aw[pos];
    for (int i = 0; i < ext.size(); ++i) {
      if (copy_all->v[i] != scatter[i]) fail(out, "p_gen=0 mixture != copy scatter");
    }

    // Saturated gate inside the full step: exact endpoints.
    if (trial % 50 == 0) {
      DecoderParams sat = init_decoder(h, e, state, proj, base.size(), false, rng);
      for (auto& x : sat.w_h->v) x = 0.0;
      for (auto& x : sat.w_s->v) x = 0.0;
      for (auto& x : sat.w_y->v) x = 0.0;
      sat.ptr_b->v[0] = 1000.0;
      DecoderStep gen_step = step_plain(g, s0, c0, y, enc, attn, sat, src_ids, ext);
      if (gen_step.p_gen->v[0] != 1.0) fail(out, "saturated gate not exactly 1");
      for (int i = base.size(); i < ext.size(); ++i) {
        if (gen_step.dist->v[i] != 0.0) fail(out, "saturated-1 copy mass");
      }
      sat.ptr_b->v[0] = -1000.0;
      DecoderStep copy_step = step_plain(g, s0, c0, y, enc, attn, sat, src_ids, ext);
      if (copy_step.p_gen->v[0] != 0.0) fail(out, "saturated gate not exactly 0");
      std::vector<double> scatter0(ext.size(), 0.0);
      for (int pos = 0; pos < n; ++pos) {
        scatter0[src_ids[pos]] += copy_step.attn->v[pos];
      }
      for (int i = 0; i < ext.size(); ++i) {
        if (copy_step.dist->v[i] != scatter0[i]) {
          fail(out, "saturated-0 dist != attention scatter");
        }
      }
    }
  }
  if (out.pass) out.detail = fmt("1000 configs, worst |sum-1| = %.3g", worst_gap);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Background-gate reduction: zeroed b-columns make the gated step
//    bit-equal to the plain step on 100 random inputs.
// ---------------------------------------------------------------------------
Outcome c3_gate_reduction() {
  Outcome out;
  for (int seed = 1; seed <= 100 && out.pass; ++seed) {
    Rng rng(seed);
    const int h = 3, e = 2, state = 4, a = 3, proj = 3;
    int n = 1 + static_cast<int>(rng.index(4));

    Vocabulary base;
    base.add("u");
    base.add("v");
    Tokens src;
    for (int i = 0; i < n; ++i) src.push_back(i % 2 ? "u" : "x");
    std::vector<int> src_ids;
    ExtendedVocab ext = ExtendedVocab::build(base, src, &src_ids);

    DecoderParams gated = init_decoder(h, e, state, proj, base.size(), true, rng);
    AttnParams attn = init_attention(state, h, a, rng);

    std::vector<double> vals(static_cast<size_t>(n) * state);
    for (auto& x : vals) x = rng.uniform(-1.0, 1.0);
    EncoderOutput enc;
    enc.states = make_tensor({n, state}, vals, false);
    std::vector<double> fin(vals.end() - state, vals.end());
    enc.final = make_tensor({state}, fin, false);

    // Plain twin: leading h+e kernel columns; then kill the gated b-block.
    DecoderParams plain = gated;
    plain.cell.W = make_tensor({4 * h, h + e}, true);
    for (int r = 0; r < 4 * h; ++r) {
      for (int col = 0; col < h + e; ++col) {
        plain.cell.W->v[r * (h + e) + col] = gated.cell.W->v[r * (h + e + state) + col];
      }
    }
    for (int r = 0; r < 4 * h; ++r) {
      for (int col = h + e; col < h + e + state; ++col) {
        gated.cell.W->v[r * (h + e + state) + col] = 0.0;
      }
    }

    auto vec = [&](int d) {
      std::vector<double> v(d);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      return make_tensor({d}, v, false);
    };
    Graph g;
    auto s0 = vec(h), c0 = vec(h), y = vec(e), b = vec(state);
    DecoderStep gs = step_background(g, s0, c0, y, b, enc, attn, gated, src_ids, ext);
    DecoderStep ps = step_plain(g, s0, c0, y, enc, attn, plain, src_ids, ext);

    for (int i = 0; i < h && out.pass; ++i) {
      if (gs.s->v[i] != ps.s->v[i] || gs.c->v[i] != ps.c->v[i]) {
        fail(out, "state diverged at seed " + std::to_string(seed));
      }
    }
    for (int i = 0; i < n && out.pass; ++i) {
      if (gs.attn->v[i] != ps.attn->v[i]) fail(out, "attention diverged");
    }
    if (out.pass && gs.p_gen->v[0] != ps.p_gen->v[0]) fail(out, "p_gen diverged");
    for (int i = 0; i < gs.dist->size() && out.pass; ++i) {
      if (gs.dist->v[i] != ps.dist->v[i]) {
        fail(out, "distribution diverged at seed " + std::to_string(seed));
      }
    }
  }
  if (out.pass) out.detail = "bit-equal on 100 random inputs";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Memorization: 20 synthetic reports, dev NLL < 0.1 per token, greedy
//    reproduces all 20 impressions, ROUGE-1/2/L = 100 within 0.01.
// ---------------------------------------------------------------------------
Outcome c4_memorization() {
  Outcome out;
  auto corpus = generate_synthetic_corpus(20, 42);
  Vocabulary vocab = build_vocab(corpus);

  ModelConfig cfg;
  cfg.emb_dim = 24;
  cfg.enc_hidden = 16;
  cfg.enc_layers = 1;
  cfg.dec_hidden = 32;
  cfg.attn_dim = 32;
  cfg.proj_dim = 32;
  cfg.variant = Variant::BackgroundGated;
  Model m = init_model(cfg, vocab, 7);

  TrainConfig tc;
  tc.lr = 3e-3;
  tc.batch_size = 4;
  tc.patience = 1000;  // pure memorization: never stop on dev
  tc.seed = 3;

  auto greedy_matches = [&](TrainState& st_in, std::vector<Tokens>* preds_out) {
    int matched = 0;
    for (const auto& r : corpus) {
      ModelStepper st(st_in.best, r);
      Tokens pred = resolve_tokens(st.ext(), greedy_decode(st, 30));
      matched += pred == r.impression ? 1 : 0;
      if (preds_out) preds_out->push_back(std::move(pred));
    }
    return matched;
  };

  // Keep training until the set is truly memorized (greedy-exact), not just
  // below the loss bar; both conditions are required to pass.
  TrainState state;
  const int cap = 1000;
  int matched = 0;
  while (state.next_epoch < cap) {
    tc.max_epochs = std::min(state.next_epoch + 25, cap);
    train(m, corpus, corpus, tc, state, nullptr);
    if (state.best_dev < 0.1) {
      matched = greedy_matches(state, nullptr);
      std::fprintf(stderr, "  [c4] epoch %d dev_nll %.4f greedy %d/20\n",
                   state.next_epoch, state.best_dev, matched);
      if (matched == 20) break;
    } else {
      std::fprintf(stderr, "  [c4] epoch %d dev_nll %.4f\n", state.next_epoch,
                   state.best_dev);
    }
  }
  if (state.best_dev >= 0.1) {
    fail(out, fmt("dev NLL %.4f after %.0f epochs", state.best_dev,
                  static_cast<double>(state.next_epoch)));
  }

  std::vector<Tokens> preds, refs;
  for (const auto& r : corpus) refs.push_back(r.impression);
  matched = greedy_matches(state, &preds);
  if (matched != 20) fail(out, std::to_string(matched) + "/20 greedy matches");

  auto rouge = corpus_rouge(preds, refs, 1000, 99);
  for (auto [name, v] : {std::pair{"1", rouge.rouge1.mean_f1},
                         std::pair{"2", rouge.rouge2.mean_f1},
                         std::pair{"L", rouge.rougeL.mean_f1}}) {
    if (std::abs(v - 100.0) > 0.01) {
      fail(out, std::string("rouge") + name + fmt(" = %.3f", v));
    }
  }
  if (out.pass) {
    out.detail = fmt("dev NLL %.4f after %.0f epochs, 20/20 greedy matches, "
                     "rouge 100/100/100",
                     state.best_dev, static_cast<double>(state.next_epoch));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5. Ordinal reproduction: held-out ROUGE-L gated > plain > both extractive
//    baselines, gated - plain >= 2 points, on 1000 synthetic reports.
// ---------------------------------------------------------------------------
double mean_rouge_l(const std::vector<Tokens>& preds, const std::vector<Tokens>& refs) {
  return corpus_rouge(preds, refs, 50, 31).rougeL.mean_f1;
}

Outcome c5_ordinal_reproduction() {
  Outcome out;
  auto corpus = generate_synthetic_corpus(1000, 11);
  auto split = split_corpus(corpus, 0.7, 0.1, 0.2, 21);
  Vocabulary vocab = build_vocab(split.train);

  auto train_variant = [&](Variant variant) {
    ModelConfig cfg;
    cfg.emb_dim = 32;
    cfg.enc_hidden = 32;
    cfg.enc_layers = 1;
    cfg.dec_hidden = 64;
    cfg.attn_dim = 64;
    cfg.proj_dim = 200;  // narrower projections keep the gated run at the
                         // laterality coin-flip floor for far longer
    cfg.variant = variant;
    Model m = init_model(cfg, vocab, 5);
    TrainConfig tc;
    tc.lr = 2e-3;  // the background pathway locks in around epoch 40 here
    tc.batch_size = 16;
    tc.max_epochs = 60;
    tc.patience = 20;
    tc.seed = 9;
    TrainState state;
    train(m, split.train, split.dev, tc, state, [&](const EpochLog& log) {
      std::fprintf(stderr, "  [c5 %s] epoch %d train %.4f dev %.4f%s\n",
                   variant_name(variant), log.epoch, log.train_nll, log.dev_nll,
                   log.improved ? " *" : "");
    });
    return state.best;
  };

  Model gated = train_variant(Variant::BackgroundGated);
  Model plain = train_variant(Variant::Plain);

  std::vector<Tokens> refs;
  for (const auto& r : split.test) refs.push_back(r.impression);
  auto decode_all = [&](const Model& m) {
    std::vector<Tokens> preds(split.test.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < split.test.size(); ++i) {
      preds[i] = summarize_tokens(m, split.test[i], 5, 30);
    }
    return preds;
  };
  double rl_gated = mean_rouge_l(decode_all(gated), refs);
  double rl_plain = mean_rouge_l(decode_all(plain), refs);

  std::vector<Tokens> lex_preds, lsa_preds;
  for (const auto& r : split.test) {
    lex_preds.push_back(baseline_summary("lexrank", r.findings, 3));
    lsa_preds.push_back(baseline_summary("lsa", r.findings, 3));
  }
  double rl_lex = mean_rouge_l(lex_preds, refs);
  double rl_lsa = mean_rouge_l(lsa_preds, refs);

  out.detail = fmt("ROUGE-L: gated %.2f, plain %.2f, ", rl_gated, rl_plain) +
               fmt("lexrank %.2f, lsa %.2f", rl_lex, rl_lsa);
  if (!(rl_gated > rl_plain)) fail(out, "gated does not beat plain");
  if (rl_gated - rl_plain < 2.0) fail(out, "gated-plain gap below 2 points");
  if (!(rl_plain > rl_lex)) fail(out, "plain does not beat lexrank");
  if (!(rl_plain > rl_lsa)) fail(out, "plain does not beat lsa");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Beam-search optimality: saturating beam == exhaustive argmax on 100
//    hand-built toy models; beam=1 == greedy on all of them.
// ---------------------------------------------------------------------------
Outcome c6_beam_optimality() {
  Outcome out;
  int exact = 0;
  for (int trial = 1; trial <= 100; ++trial) {
    Rng rng(500 + trial);
    int vocab = 2 + static_cast<int>(rng.index(5));       // <= 6
    int max_len = 1 + static_cast<int>(rng.index(4));     // <= 4
    double zero_frac = trial % 3 == 0 ? 0.3 : 0.0;
    testutil::ToyStepper toy(vocab,
                             testutil::random_toy_table(vocab, max_len, rng, zero_frac));

    auto oracle = testutil::ranked(testutil::enumerate_all(toy, max_len));
    auto beams = beam_search(toy, 1600, max_len);  // saturates every level
    if (beams.empty() || oracle.empty()) {
      fail(out, "empty result at trial " + std::to_string(trial));
      break;
    }
    if (beams[0].tokens == oracle[0].tokens && beams[0].logp == oracle[0].logp) {
      ++exact;
    } else {
      fail(out, "argmax mismatch at trial " + std::to_string(trial));
      break;
    }

    auto one = beam_search(toy, 1, max_len);
    auto greedy = greedy_decode(toy, max_len);
    if (one.size() != 1 || one[0].tokens != greedy) {
      fail(out, "beam=1 != greedy at trial " + std::to_string(trial));
      break;
    }
  }
  if (out.pass) out.detail = std::to_string(exact) + "/100 exhaustive argmax matches";
  return out;
}

// ---------------------------------------------------------------------------
// 7. ROUGE oracle: exact scores on the ankle example pair; 50 random pairs
//    against an independent brute-force oracle.
// ---------------------------------------------------------------------------
int overlap_by_matching(const Tokens& cand, const Tokens& ref, int n) {
  auto grams = [n](const Tokens& t) {
    std::vector<Tokens> out;
    for (size_t i = 0; i + n <= t.size(); ++i) {
      out.emplace_back(t.begin() + i, t.begin() + i + n);
    }
    return out;
  };
  auto cg = grams(cand), rg = grams(ref);
  std::vector<bool> used(rg.size(), false);
  int matched = 0;
  for (const auto& g : cg) {
    for (size_t j = 0; j < rg.size(); ++j) {
      if (!used[j] && rg[j] == g) {
        used[j] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

size_t lcs_memo(const Tokens& a, const Tokens& b, size_t i, size_t j,
                std::map<std::pair<size_t, size_t>, size_t>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  auto key = std::make_pair(i, j);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  size_t best = a[i] == b[j] ? 1 + lcs_memo(a, b, i + 1, j + 1, memo)
                             : std::max(lcs_memo(a, b, i + 1, j, memo),
                                        lcs_memo(a, b, i, j + 1, memo));
  memo[key] = best;
  return best;
}

RougeScore oracle_score(double overlap, size_t cand_units, size_t ref_units) {
  RougeScore s;
  s.precision = cand_units ? overlap / cand_units : 0.0;
  s.recall = ref_units ? overlap / ref_units : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

Outcome c7_rouge_oracle() {
  Outcome out;
  Tokens ref = tokenize("normal left ankle radiographs");
  Tokens cand = tokenize("normal radiographs of the left ankle");
  double r1 = rouge_n(cand, ref, 1).f1;
  double rl = rouge_l(cand, ref).f1;
  if (std::abs(r1 - 0.8) >= 1e-12) fail(out, fmt("rouge1 f1 = %.15f", r1));
  if (std::abs(rl - 0.6) >= 1e-12) fail(out, fmt("rougeL f1 = %.15f", rl));

  Rng rng(606);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 50 && out.pass; ++trial) {
    auto draw = [&] {
      Tokens t;
      size_t len = rng.index(13);
      for (size_t i = 0; i < len; ++i) t.push_back(rng.pick(alphabet));
      return t;
    };
    Tokens c = draw(), r = draw();
    for (int n : {1, 2}) {
      auto got = rouge_n(c, r, n);
      size_t cu = c.size() + 1 >= static_cast<size_t>(n) + 1 ? c.size() + 1 - n : 0;
      size_t ru = r.size() + 1 >= static_cast<size_t>(n) + 1 ? r.size() + 1 - n : 0;
      auto want = oracle_score(overlap_by_matching(c, r, n), cu, ru);
      if (std::abs(got.f1 - want.f1) >= 1e-12 ||
          std::abs(got.precision - want.precision) >= 1e-12 ||
          std::abs(got.recall - want.recall) >= 1e-12) {
        fail(out, "rouge_n mismatch at trial " + std::to_string(trial));
      }
    }
    std::map<std::pair<size_t, size_t>, size_t> memo;
    auto got = rouge_l(c, r);
    auto want = oracle_score(static_cast<double>(lcs_memo(c, r, 0, 0, memo)),
                             c.size(), r.size());
    if (std::abs(got.f1 - want.f1) >= 1e-12) {
      fail(out, "rouge_l mismatch at trial " + std::to_string(trial));
    }
  }
  if (out.pass) out.detail = "exact example scores; 50 random pairs within 1e-12";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Baseline numerics: centrality vs dense solve within 1e-6 on 50 graphs;
//    SVD reconstruction < 1e-8 and spectrum vs eigen oracle within 1e-6.
// ---------------------------------------------------------------------------
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> rhs) {
  const size_t n = rhs.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (size_t row = n; row-- > 0;) {
    double acc = rhs[row];
    for (size_t c = row + 1; c < n; ++c) acc -= a[row][c] * x[c];
    x[row] = acc / a[row][row];
  }
  return x;
}

std::vector<double> eigenvalues_desc(std::vector<std::vector<double>> a) {
  const size_t n = a.size();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-26) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double gamma = a[p][q];
        if (gamma == 0.0) continue;
        double zeta = (a[q][q] - a[p][p]) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (size_t i = 0; i < n; ++i) {
          double tp = c * a[i][p] - s * a[i][q];
          double tq = s * a[i][p] + c * a[i][q];
          a[i][p] = tp;
          a[i][q] = tq;
        }
        for (size_t i = 0; i < n; ++i) {
          double tp = c * a[p][i] - s * a[q][i];
          double tq = s * a[p][i] + c * a[q][i];
          a[p][i] = tp;
          a[q][i] = tq;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.rbegin(), eig.rend());
  return eig;
}

Outcome c8_baseline_numerics() {
  Outcome out;
  Rng rng(707);
  double worst_cent = 0.0;
  for (int trial = 0; trial < 50 && out.pass; ++trial) {
    size_t n = 1 + rng.index(8);
    double threshold = trial % 3 == 2 ? 0.6 : 0.1;
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
      sim[i][i] = 1.0;
      for (size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = rng.real();
    }
    auto iterated = lexrank_centrality(sim, threshold, 0.15, 1e-12);

    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (i != j && sim[i][j] > threshold) row_sum += sim[i][j];
      }
      if (row_sum == 0.0) continue;
      for (size_t j = 0; j < n; ++j) {
        if (i != j && sim[i][j] > threshold) p[i][j] = sim[i][j] / row_sum;
      }
    }
    std::vector<std::vector<double>> system(n, std::vector<double>(n, 0.0));
    for (size_t r = 0; r < n; ++r) {
      system[r][r] = 1.0;
      for (size_t c = 0; c < n; ++c) system[r][c] -= 0.85 * p[c][r];
    }
    auto solved = solve_linear(system, std::vector<double>(n, 0.15 / n));
    for (size_t i = 0; i < n; ++i) {
      worst_cent = std::max(worst_cent, std::abs(iterated[i] - solved[i]));
      if (std::abs(iterated[i] - solved[i]) >= 1e-6) {
        fail(out, "centrality mismatch at trial " + std::to_string(trial));
      }
    }
  }

  double worst_rec = 0.0, worst_sig = 0.0;
  for (size_t m = 1; m <= 8 && out.pass; ++m) {
    for (size_t n = 1; n <= 8 && out.pass; ++n) {
      std::vector<std::vector<double>> a(m, std::vector<double>(n));
      for (auto& row : a) {
        for (auto& x : row) x = rng.uniform(-2.0, 2.0);
      }
      auto d = svd(a);
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
          double rec = 0.0;
          for (size_t k = 0; k < n; ++k) rec += d.u[i][k] * d.sigma[k] * d.v[j][k];
          worst_rec = std::max(worst_rec, std::abs(rec - a[i][j]));
        }
      }
      if (worst_rec >= 1e-8) fail(out, fmt("reconstruction err %.3g (%gx%g)", worst_rec,
                                           static_cast<double>(m),
                                           static_cast<double>(n)));
      std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
          for (size_t k = 0; k < m; ++k) gram[i][j] += a[k][i] * a[k][j];
        }
      }
      auto eig = eigenvalues_desc(gram);
      for (size_t j = 0; j < n; ++j) {
        double want = std::sqrt(std::max(0.0, eig[j]));
        worst_sig = std::max(worst_sig, std::abs(d.sigma[j] - want));
        if (std::abs(d.sigma[j] - want) >= 1e-6) {
          fail(out, fmt("sigma mismatch %.3g (%gx%g)", std::abs(d.sigma[j] - want),
                        static_cast<double>(m), static_cast<double>(n)));
        }
      }
    }
  }
  if (out.pass) {
    out.detail = fmt("centrality err %.2g; reconstruction %.2g; sigma %.2g",
                     worst_cent, worst_rec, worst_sig);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 9. Corpus rules: exact keep/drop ledger on a fixture exercising every
//    exclusion rule; 70/10/20 split within one report of exact proportions.
// ---------------------------------------------------------------------------
Outcome c9_corpus_rules() {
  Outcome out;
  auto words = [](int n, const char* stem) {
    std::string arr = "[";
    for (int i = 0; i < n; ++i) {
      arr += std::string(i ? "," : "") + "\"" + stem + std::to_string(i) + "\"";
    }
    return arr + "]";
  };
  std::string fixture;
  // 1: boundary keep - findings exactly 10 tokens, impression exactly 2.
  fixture += "{\"id\":\"ok-1\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(10, "f") + ",\"impression\":" + words(2, "i") + "}\n";
  // 2: nine findings tokens.
  fixture += "{\"id\":\"fs-9\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(9, "f") + ",\"impression\":" + words(2, "i") + "}\n";
  // 3: one impression token.
  fixture += "{\"id\":\"im-1\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(10, "f") + ",\"impression\":" + words(1, "i") + "}\n";
  // 4: both violations: findings length wins.
  fixture += "{\"id\":\"bs\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(5, "f") + ",\"impression\":" + words(1, "i") + "}\n";
  // 5-7: one section missing each.
  fixture += "{\"id\":\"nb\",\"body_part\":\"ankle\","
             "\"findings\":" + words(10, "f") + ",\"impression\":" + words(2, "i") + "}\n";
  fixture += "{\"id\":\"nf\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"impression\":" + words(2, "i") + "}\n";
  fixture += "{\"id\":\"ni\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(10, "f") + "}\n";
  // 8: duplicated section key.
  fixture += "{\"id\":\"dup\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":" + words(10, "f") + ",\"findings\":" + words(10, "f") +
             ",\"impression\":" + words(2, "i") + "}\n";
  // 9: empty section counts as missing.
  fixture += "{\"id\":\"ef\",\"body_part\":\"ankle\",\"background\":[\"hx\"],"
             "\"findings\":\"\",\"impression\":" + words(2, "i") + "}\n";
  // 10: second keeper, different body part.
  fixture += "{\"id\":\"ok-2\",\"body_part\":\"chest\",\"background\":[\"hx\"],"
             "\"findings\":" + words(11, "f") + ",\"impression\":" + words(3, "i") + "}\n";

  auto res = ingest_corpus_text(fixture);
  std::vector<std::string> want_kept = {"ok-1", "ok-2"};
  if (res.ledger.kept_ids != want_kept) fail(out, "kept set differs");

  std::vector<std::pair<std::string, DropReason>> want_dropped = {
      {"fs-9", DropReason::FindingsTooShort},
      {"im-1", DropReason::ImpressionTooShort},
      {"bs", DropReason::FindingsTooShort},
      {"line 5", DropReason::MissingBackground},
      {"line 6", DropReason::MissingFindings},
      {"line 7", DropReason::MissingImpression},
      {"line 8", DropReason::AmbiguousSections},
      {"line 9", DropReason::MissingFindings},
  };
  if (res.ledger.dropped != want_dropped) {
    std::string got;
    for (const auto& [tag, reason] : res.ledger.dropped) {
      got += tag + "=" + drop_reason_name(reason) + " ";
    }
    fail(out, "drop ledger differs: " + got);
  }
  if (res.ledger.kept_per_part != std::map<std::string, int>{{"ankle", 1},
                                                             {"chest", 1}}) {
    fail(out, "per-part tally differs");
  }

  // Split proportions, including a size the fractions do not divide evenly.
  for (int total : {23, 100, 997}) {
    auto reports = generate_synthetic_corpus(total, 13);
    auto split = split_corpus(reports, 0.7, 0.1, 0.2, 29);
    double sizes[3] = {static_cast<double>(split.train.size()),
                       static_cast<double>(split.dev.size()),
                       static_cast<double>(split.test.size())};
    double exact[3] = {0.7 * total, 0.1 * total, 0.2 * total};
    size_t sum = split.train.size() + split.dev.size() + split.test.size();
    if (sum != static_cast<size_t>(total)) fail(out, "split loses reports");
    for (int i = 0; i < 3; ++i) {
      if (std::abs(sizes[i] - exact[i]) > 1.0) {
        fail(out, fmt("split size %g vs exact %g (n=%g)", sizes[i], exact[i],
                      static_cast<double>(total)));
      }
    }
    std::set<std::string> seen;
    for (const auto* part : {&split.train, &split.dev, &split.test}) {
      for (const auto& r : *part) seen.insert(r.id);
    }
    if (seen.size() != static_cast<size_t>(total)) fail(out, "split duplicates ids");
  }
  if (out.pass) out.detail = "exact ledger; 70/10/20 within one report";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int number;
    const char* name;
    Outcome (*run)();
    double limit_seconds;
  };
  const std::vector<Entry> entries = {
      {1, "gradient fidelity (full pipeline vs finite differences)",
       c1_gradient_fidelity, 60.0},
      {2, "distribution laws (mixture normalization and endpoints)",
       c2_distribution_laws, 120.0},
      {3, "background-gate reduction (gated == plain, bitwise)",
       c3_gate_reduction, 60.0},
      {4, "memorization (20 reports, NLL < 0.1, greedy exact)",
       c4_memorization, 600.0},
      {5, "ordinal reproduction (gated > plain > extractive)",
       c5_ordinal_reproduction, 3600.0},
      {6, "beam-search optimality (saturating beam == enumeration)",
       c6_beam_optimality, 60.0},
      {7, "rouge oracle (example pair exact; random vs brute force)",
       c7_rouge_oracle, 60.0},
      {8, "baseline numerics (centrality solve; svd spectrum)",
       c8_baseline_numerics, 60.0},
      {9, "corpus rules (exclusion ledger; split proportions)",
       c9_corpus_rules, 60.0},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& entry : entries) {
    if (!wanted.empty() && !wanted.count(entry.number)) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome out = entry.run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start)
                      .count();
    if (secs > entry.limit_seconds) {
      fail(out, fmt("over the %.0fs runtime limit", entry.limit_seconds));
    }
    std::printf("%s  %d. %s  (%.1fs)%s%s\n", out.pass ? "PASS" : "FAIL",
                entry.number, entry.name, secs, out.detail.empty() ? "" : "  -- ",
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
