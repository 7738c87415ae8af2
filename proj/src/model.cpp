#include "rfsum/model.hpp"

#include "rfsum/embeddings.hpp"
#include "rfsum/errors.hpp"

namespace rfsum {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Plain: return "plain";
    case Variant::PrependBackground: return "prepend";
    case Variant::BackgroundGated: return "gated";
  }
  throw InvalidArgument("unknown variant value");
}

Variant variant_from_name(const std::string& name) {
  if (name == "plain") return Variant::Plain;
  if (name == "prepend") return Variant::PrependBackground;
  if (name == "gated") return Variant::BackgroundGated;
  throw InvalidArgument("unknown variant '" + name +
                        "' (expected plain, prepend, or gated)");
}

namespace {

void push_birnn(std::vector<std::pair<std::string, TensorRef>>& out,
                const std::string& prefix, const BiRnnParams& p) {
  for (int l = 0; l < p.layers(); ++l) {
    std::string base = prefix + ".l" + std::to_string(l);
    out.emplace_back(base + ".fwd.W", p.fwd[l].W);
    out.emplace_back(base + ".fwd.b", p.fwd[l].b);
    out.emplace_back(base + ".bwd.W", p.bwd[l].W);
    out.emplace_back(base + ".bwd.b", p.bwd[l].b);
  }
}

void push_attn(std::vector<std::pair<std::string, TensorRef>>& out,
               const std::string& prefix, const AttnParams& p) {
  out.emplace_back(prefix + ".W_h", p.W_h);
  out.emplace_back(prefix + ".W_s", p.W_s);
  out.emplace_back(prefix + ".v", p.v);
  out.emplace_back(prefix + ".bias", p.bias);
}

TensorRef copy_tensor(const TensorRef& t) {
  if (!t) return nullptr;
  auto c = make_tensor(t->shape, t->v, t->requires_grad);
  return c;
}

LstmParams copy_lstm(const LstmParams& p) {
  return LstmParams{copy_tensor(p.W), copy_tensor(p.b)};
}

BiRnnParams copy_birnn(const BiRnnParams& p) {
  BiRnnParams c;
  c.hidden = p.hidden;
  for (const auto& l : p.fwd) c.fwd.push_back(copy_lstm(l));
  for (const auto& l : p.bwd) c.bwd.push_back(copy_lstm(l));
  return c;
}

AttnParams copy_attn(const AttnParams& p) {
  return AttnParams{copy_tensor(p.W_h), copy_tensor(p.W_s), copy_tensor(p.v),
                    copy_tensor(p.bias)};
}

}  // namespace

std::vector<std::pair<std::string, TensorRef>> Model::named_params() const {
  std::vector<std::pair<std::string, TensorRef>> out;
  out.emplace_back("embed.table", embedding);
  push_birnn(out, "enc", enc);
  if (gated()) push_birnn(out, "bg", bg_enc);
  push_attn(out, "attn", attn);
  if (gated()) push_attn(out, "battn", battn);
  out.emplace_back("dec.W", dec.cell.W);
  out.emplace_back("dec.b", dec.cell.b);
  out.emplace_back("dec.V", dec.V);
  out.emplace_back("dec.Vb", dec.Vb);
  out.emplace_back("dec.V2", dec.V2);
  out.emplace_back("dec.V2b", dec.V2b);
  out.emplace_back("dec.ptr_wh", dec.w_h);
  out.emplace_back("dec.ptr_ws", dec.w_s);
  out.emplace_back("dec.ptr_wy", dec.w_y);
  out.emplace_back("dec.ptr_b", dec.ptr_b);
  if (bridge_W) {
    out.emplace_back("bridge.W", bridge_W);
    out.emplace_back("bridge.b", bridge_b);
  }
  return out;
}

Model Model::clone() const {
  Model c;
  c.cfg = cfg;
  c.vocab = vocab;
  c.embedding = copy_tensor(embedding);
  c.enc = copy_birnn(enc);
  c.bg_enc = copy_birnn(bg_enc);
  c.attn = copy_attn(attn);
  c.battn = copy_attn(battn);
  c.dec.cell = copy_lstm(dec.cell);
  c.dec.V = copy_tensor(dec.V);
  c.dec.Vb = copy_tensor(dec.Vb);
  c.dec.V2 = copy_tensor(dec.V2);
  c.dec.V2b = copy_tensor(dec.V2b);
  c.dec.w_h = copy_tensor(dec.w_h);
  c.dec.w_s = copy_tensor(dec.w_s);
  c.dec.w_y = copy_tensor(dec.w_y);
  c.dec.ptr_b = copy_tensor(dec.ptr_b);
  c.bridge_W = copy_tensor(bridge_W);
  c.bridge_b = copy_tensor(bridge_b);
  return c;
}

Model init_model(const ModelConfig& cfg, const Vocabulary& vocab,
                 std::uint64_t seed) {
  if (cfg.emb_dim < 1 || cfg.enc_hidden < 1 || cfg.enc_layers < 1 ||
      cfg.dec_hidden < 1 || cfg.attn_dim < 1 || cfg.proj_dim < 1)
    throw InvalidArgument("model dimensions must be positive");
  Model m;
  m.cfg = cfg;
  m.vocab = vocab;
  Rng rng(seed);
  m.embedding = init_embedding_table(vocab.size(), cfg.emb_dim, rng);
  m.enc = init_birnn(cfg.emb_dim, cfg.enc_hidden, cfg.enc_layers, rng);
  bool gated = cfg.variant == Variant::BackgroundGated;
  if (gated)
    m.bg_enc = init_birnn(cfg.emb_dim, cfg.enc_hidden, cfg.enc_layers, rng);
  int state = 2 * cfg.enc_hidden;
  m.attn = init_attention(state, cfg.dec_hidden, cfg.attn_dim, rng);
  if (gated) m.battn = init_attention(state, state, cfg.attn_dim, rng);
  m.dec = init_decoder(cfg.dec_hidden, cfg.emb_dim, state, cfg.proj_dim,
                       vocab.size(), gated, rng);
  if (state != cfg.dec_hidden) {
    m.bridge_W = make_tensor({cfg.dec_hidden, state}, true);
    for (auto& x : m.bridge_W->v) x = rng.uniform(-0.08, 0.08);
    m.bridge_b = make_tensor({cfg.dec_hidden}, true);
    for (auto& x : m.bridge_b->v) x = rng.uniform(-0.08, 0.08);
  }
  return m;
}

Encoded encode_example(Graph& g, const Model& m, const Report& r) {
  if (r.findings.empty()) throw EmptyFindings("findings section is empty");
  Encoded ex;
  ex.src_tokens = r.findings;
  if (m.cfg.variant == Variant::PrependBackground) {
    if (r.background.empty())
      throw MissingSection("background section is empty");
    ex.src_tokens = r.background;
    ex.src_tokens.insert(ex.src_tokens.end(), r.findings.begin(),
                         r.findings.end());
  }
  ex.ext = ExtendedVocab::build(m.vocab, ex.src_tokens, &ex.src_ext_ids);

  auto emb = g.lookup(m.embedding, m.vocab.encode(ex.src_tokens));
  ex.enc = encode(g, emb, m.enc);
  ex.keys = attention_keys(g, ex.enc.states, m.attn);

  if (m.gated()) {
    if (r.background.empty())
      throw MissingSection("background section is empty");
    auto bg_emb = g.lookup(m.embedding, m.vocab.encode(r.background));
    auto bg = encode_background(g, bg_emb, m.bg_enc);
    ex.bvec = background_vector(g, bg.states, ex.enc.final, m.battn);
  }

  if (m.bridge_W) {
    ex.s0 = g.tanh(g.add(g.matvec(m.bridge_W, ex.enc.final), m.bridge_b));
  } else {
    ex.s0 = ex.enc.final;
  }
  ex.c0 = make_tensor({m.cfg.dec_hidden});  // zeros, no gradient
  return ex;
}

DecoderStep decode_step(Graph& g, const Model& m, const Encoded& ex,
                        const TensorRef& s_prev, const TensorRef& c_prev,
                        int prev_ext_id) {
  if (prev_ext_id < 0 || prev_ext_id >= ex.ext.size())
    throw IdOutOfRange("previous token id " + std::to_string(prev_ext_id) +
                       " outside the extended vocabulary");
  int emb_id =
      prev_ext_id < m.vocab.size() ? prev_ext_id : Vocabulary::kUnk;
  auto y = g.embed(m.embedding, emb_id);
  return decode_step_with_keys(g, s_prev, c_prev, y, ex.bvec, ex.enc, ex.keys,
                               m.attn, m.dec, ex.src_ext_ids, ex.ext);
}

}  // namespace rfsum
