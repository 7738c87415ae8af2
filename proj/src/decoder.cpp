#include "rfsum/decoder.hpp"

#include "rfsum/errors.hpp"

namespace rfsum {

int ExtendedVocab::id(const std::string& tok) const {
  int base_id = base->id(tok);
  if (base_id != Vocabulary::kUnk) return base_id;
  auto it = extra_ids.find(tok);
  if (it != extra_ids.end()) return base->size() + it->second;
  return Vocabulary::kUnk;
}

const std::string& ExtendedVocab::token(int id) const {
  if (id >= 0 && id < base->size()) return base->token(id);
  int idx = id - base->size();
  if (idx < 0 || idx >= static_cast<int>(extra.size()))
    throw IdOutOfRange("extended id " + std::to_string(id) + " out of range");
  return extra[idx];
}

std::vector<int> ExtendedVocab::encode(const Tokens& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

ExtendedVocab ExtendedVocab::build(const Vocabulary& base, const Tokens& src,
                                   std::vector<int>* src_ext_ids) {
  ExtendedVocab ext;
  ext.base = &base;
  if (src_ext_ids) {
    src_ext_ids->clear();
    src_ext_ids->reserve(src.size());
  }
  for (const auto& tok : src) {
    int base_id = base.id(tok);
    int ext_id;
    if (base_id != Vocabulary::kUnk) {
      ext_id = base_id;
    } else {
      auto it = ext.extra_ids.find(tok);
      if (it == ext.extra_ids.end()) {
        int idx = static_cast<int>(ext.extra.size());
        ext.extra.push_back(tok);
        ext.extra_ids.emplace(tok, idx);
        ext_id = base.size() + idx;
      } else {
        ext_id = base.size() + it->second;
      }
    }
    if (src_ext_ids) src_ext_ids->push_back(ext_id);
  }
  return ext;
}

DecoderParams init_decoder(int dec_hidden, int emb_dim, int ctx_dim,
                           int proj_dim, int vocab_size, bool gated, Rng& rng) {
  if (dec_hidden < 1 || emb_dim < 1 || ctx_dim < 1 || proj_dim < 1 ||
      vocab_size < 1)
    throw InvalidArgument("decoder dimensions must be positive");
  int kernel_in = dec_hidden + emb_dim + (gated ? ctx_dim : 0);
  DecoderParams p;
  auto uniform = [&rng](const std::vector<int>& shape) {
    auto t = make_tensor(shape, true);
    for (auto& x : t->v) x = rng.uniform(-0.08, 0.08);
    return t;
  };
  p.cell.W = uniform({4 * dec_hidden, kernel_in});
  p.cell.b = make_tensor({4 * dec_hidden}, true);
  for (int i = dec_hidden; i < 2 * dec_hidden; ++i) p.cell.b->v[i] = 1.0;
  p.V = uniform({proj_dim, dec_hidden + ctx_dim});
  p.Vb = uniform({proj_dim});
  p.V2 = uniform({vocab_size, proj_dim});
  p.V2b = uniform({vocab_size});
  p.w_h = uniform({ctx_dim});
  p.w_s = uniform({dec_hidden});
  p.w_y = uniform({emb_dim});
  p.ptr_b = uniform({1});
  return p;
}

TensorRef p_gen(Graph& g, const TensorRef& h_star, const TensorRef& s_t,
                const TensorRef& y_prev_emb, const DecoderParams& p) {
  auto logit = g.add(g.add(g.dot(p.w_h, h_star), g.dot(p.w_s, s_t)),
                     g.add(g.dot(p.w_y, y_prev_emb), p.ptr_b));
  return g.sigmoid(logit);
}

TensorRef mixture(Graph& g, const TensorRef& p_gen_t, const TensorRef& p_vocab,
                  const TensorRef& attn, const std::vector<int>& src_ext_ids,
                  const ExtendedVocab& ext) {
  return g.pointer_mixture(p_gen_t, p_vocab, attn, src_ext_ids, ext.size());
}

DecoderStep decode_step_with_keys(Graph& g, const TensorRef& s_prev,
                                  const TensorRef& c_prev,
                                  const TensorRef& y_prev_emb,
                                  const TensorRef& bvec,
                                  const EncoderOutput& enc, const TensorRef& keys,
                                  const AttnParams& attn, const DecoderParams& p,
                                  const std::vector<int>& src_ext_ids,
                                  const ExtendedVocab& ext) {
  std::vector<TensorRef> kernel_in{s_prev, y_prev_emb};
  if (bvec) kernel_in.push_back(bvec);  // background columns are the tail block
  auto input = g.concat(kernel_in);
  auto [s_t, c_t] = lstm_gates(g, input, c_prev, p.cell);

  auto att = attend_with_keys(g, enc.states, keys, s_t, attn);
  auto proj_in = g.concat({s_t, att.context});
  auto hidden = g.tanh(g.add(g.matvec(p.V, proj_in), p.Vb));
  auto p_vocab = g.softmax(g.add(g.matvec(p.V2, hidden), p.V2b));
  auto pg = p_gen(g, att.context, s_t, y_prev_emb, p);
  auto dist = mixture(g, pg, p_vocab, att.weights, src_ext_ids, ext);

  DecoderStep step;
  step.s = s_t;
  step.c = c_t;
  step.attn = att.weights;
  step.p_gen = pg;
  step.dist = dist;
  return step;
}

DecoderStep step_plain(Graph& g, const TensorRef& s_prev, const TensorRef& c_prev,
                       const TensorRef& y_prev_emb, const EncoderOutput& enc,
                       const AttnParams& attn, const DecoderParams& p,
                       const std::vector<int>& src_ext_ids,
                       const ExtendedVocab& ext) {
  auto keys = attention_keys(g, enc.states, attn);
  return decode_step_with_keys(g, s_prev, c_prev, y_prev_emb, nullptr, enc, keys,
                               attn, p, src_ext_ids, ext);
}

DecoderStep step_background(Graph& g, const TensorRef& s_prev,
                            const TensorRef& c_prev, const TensorRef& y_prev_emb,
                            const TensorRef& bvec, const EncoderOutput& enc,
                            const AttnParams& attn, const DecoderParams& p,
                            const std::vector<int>& src_ext_ids,
                            const ExtendedVocab& ext) {
  if (!bvec) throw InvalidArgument("background vector is required");
  auto keys = attention_keys(g, enc.states, attn);
  return decode_step_with_keys(g, s_prev, c_prev, y_prev_emb, bvec, enc, keys,
                               attn, p, src_ext_ids, ext);
}

}  // namespace rfsum
