#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rfsum/attention.hpp"
#include "rfsum/corpus.hpp"
#include "rfsum/decoder.hpp"
#include "rfsum/encoder.hpp"
#include "rfsum/tensor.hpp"

namespace rfsum {

// How the background section enters the model:
//   Plain              - findings only, background unused
//   PrependBackground  - background tokens prepended to the findings as one
//                        source sequence (and copy source)
//   BackgroundGated    - separate background encoder summarized once into a
//                        fixed vector that feeds every decoder step
enum class Variant { Plain, PrependBackground, BackgroundGated };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // InvalidArgument

struct ModelConfig {
  int emb_dim = 100;
  int enc_hidden = 100;  // per direction
  int enc_layers = 2;
  int dec_hidden = 200;
  int attn_dim = 200;
  int proj_dim = 200;
  Variant variant = Variant::BackgroundGated;
};

struct Model {
  ModelConfig cfg;
  Vocabulary vocab;
  TensorRef embedding;       // [|V| x emb_dim], shared by all encoders/decoder
  BiRnnParams enc;           // findings encoder
  BiRnnParams bg_enc;        // background encoder (gated variant only)
  AttnParams attn;           // decoder attention over findings states
  AttnParams battn;          // one-shot background attention (gated only)
  DecoderParams dec;
  TensorRef bridge_W, bridge_b;  // only when 2*enc_hidden != dec_hidden

  bool gated() const { return cfg.variant == Variant::BackgroundGated; }
  int state_dim() const { return 2 * cfg.enc_hidden; }

  // Stable (name, tensor) listing; the names are the checkpoint contract.
  std::vector<std::pair<std::string, TensorRef>> named_params() const;
  Model clone() const;  // deep copy with fresh tensor storage
};

Model init_model(const ModelConfig& cfg, const Vocabulary& vocab,
                 std::uint64_t seed);

// Everything about one source example the decoder reuses across steps.
struct Encoded {
  EncoderOutput enc;
  TensorRef keys;   // precomputed attention key projections
  TensorRef bvec;   // fixed background vector; null unless gated
  TensorRef s0, c0; // initial decoder state
  Tokens src_tokens;
  std::vector<int> src_ext_ids;
  ExtendedVocab ext;
};

// Runs the encoder side once: embeds the source, encodes it, precomputes
// attention keys, summarizes the background (gated), and bridges the final
// encoder state into the decoder's initial state.
Encoded encode_example(Graph& g, const Model& m, const Report& r);

// One decoder step given the previous emitted token as an extended id.
// Extended ids past the base vocabulary embed as <unk>.
DecoderStep decode_step(Graph& g, const Model& m, const Encoded& ex,
                        const TensorRef& s_prev, const TensorRef& c_prev,
                        int prev_ext_id);

}  // namespace rfsum
