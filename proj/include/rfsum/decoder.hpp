#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rfsum/attention.hpp"
#include "rfsum/corpus.hpp"
#include "rfsum/encoder.hpp"
#include "rfsum/rng.hpp"
#include "rfsum/tensor.hpp"

namespace rfsum {

// Per-example vocabulary: the base vocabulary plus temporary ids for source
// tokens the base does not know. Copy mass can land on those ids, so an
// unknown source token never has to surface as <unk>.
struct ExtendedVocab {
  const Vocabulary* base = nullptr;
  std::vector<std::string> extra;                 // id = base size + index
  std::unordered_map<std::string, int> extra_ids;

  int size() const { return base->size() + static_cast<int>(extra.size()); }
  int id(const std::string& tok) const;           // kUnk when truly unknown
  const std::string& token(int id) const;         // IdOutOfRange
  std::vector<int> encode(const Tokens& tokens) const;

  // Builds the extension from the source tokens and fills src_ext_ids with
  // one extended id per source position.
  static ExtendedVocab build(const Vocabulary& base, const Tokens& src,
                             std::vector<int>* src_ext_ids);
};

// Decoder parameter bundle. The recurrent kernel input is
//   [s_prev; y_prev]            for the plain decoder
//   [s_prev; y_prev; b]         for the background-gated decoder,
// so the background columns are the trailing block of W.
struct DecoderParams {
  LstmParams cell;           // W: [4s x kernel_in]
  TensorRef V, Vb;           // vocabulary projection layer 1: [p x (s+ctx)], [p]
  TensorRef V2, V2b;         // layer 2: [|V| x p], [|V|]
  TensorRef w_h, w_s, w_y;   // generation-probability weights
  TensorRef ptr_b;           // generation-probability bias, shape [1]
  int hidden() const { return cell.hidden(); }
};

DecoderParams init_decoder(int dec_hidden, int emb_dim, int ctx_dim,
                           int proj_dim, int vocab_size, bool gated, Rng& rng);

// sigma(w_h . h_star + w_s . s_t + w_y . y_prev + bias) as a [1] tensor.
TensorRef p_gen(Graph& g, const TensorRef& h_star, const TensorRef& s_t,
                const TensorRef& y_prev_emb, const DecoderParams& p);

// Generate/copy mixture over the extended vocabulary.
TensorRef mixture(Graph& g, const TensorRef& p_gen_t, const TensorRef& p_vocab,
                  const TensorRef& attn, const std::vector<int>& src_ext_ids,
                  const ExtendedVocab& ext);

struct DecoderStep {
  TensorRef s;      // [dec hidden]
  TensorRef c;      // [dec hidden]
  TensorRef attn;   // [N] attention over source states
  TensorRef p_gen;  // [1]
  TensorRef dist;   // [extended vocab size]
};

// One decode step of the plain pointer-generator.
DecoderStep step_plain(Graph& g, const TensorRef& s_prev, const TensorRef& c_prev,
                       const TensorRef& y_prev_emb, const EncoderOutput& enc,
                       const AttnParams& attn, const DecoderParams& p,
                       const std::vector<int>& src_ext_ids,
                       const ExtendedVocab& ext);

// Same step with the fixed background vector appended to the kernel input.
DecoderStep step_background(Graph& g, const TensorRef& s_prev,
                            const TensorRef& c_prev, const TensorRef& y_prev_emb,
                            const TensorRef& bvec, const EncoderOutput& enc,
                            const AttnParams& attn, const DecoderParams& p,
                            const std::vector<int>& src_ext_ids,
                            const ExtendedVocab& ext);

// Shared implementation with precomputed attention keys (per-example reuse);
// bvec may be null for the plain decoder.
DecoderStep decode_step_with_keys(Graph& g, const TensorRef& s_prev,
                                  const TensorRef& c_prev,
                                  const TensorRef& y_prev_emb,
                                  const TensorRef& bvec,
                                  const EncoderOutput& enc, const TensorRef& keys,
                                  const AttnParams& attn, const DecoderParams& p,
                                  const std::vector<int>& src_ext_ids,
                                  const ExtendedVocab& ext);

}  // namespace rfsum
