#pragma once

#include "rfsum/rng.hpp"
#include "rfsum/tensor.hpp"

namespace rfsum {

// Additive attention head: score_i = v . tanh(W_h h_i + W_s q + bias).
struct AttnParams {
  TensorRef W_h;   // [a x state_dim]
  TensorRef W_s;   // [a x query_dim]
  TensorRef v;     // [a]
  TensorRef bias;  // [a]
  int dim() const { return v->size(); }
};

AttnParams init_attention(int state_dim, int query_dim, int attn_dim, Rng& rng);

struct AttentionResult {
  TensorRef weights;  // [N], nonnegative, sums to 1
  TensorRef context;  // [state_dim] = sum_i weights[i] * states[i]
};

// Softmax over explicit scores followed by the weighted sum; the core both
// attention entry points share.
AttentionResult attend_scores(Graph& g, const TensorRef& states,
                              const TensorRef& scores);

// Per-state key projections W_h h_i, computable once per example and reused
// across decode steps.
TensorRef attention_keys(Graph& g, const TensorRef& states, const AttnParams& p);

AttentionResult attend_with_keys(Graph& g, const TensorRef& states,
                                 const TensorRef& keys, const TensorRef& query,
                                 const AttnParams& p);

AttentionResult attend(Graph& g, const TensorRef& states, const TensorRef& query,
                       const AttnParams& p);

// Single-shot background summary: attends over the background states with the
// findings-encoder final state as the (fixed) query, so the result conditions
// every decode step without changing between steps.
TensorRef background_vector(Graph& g, const TensorRef& bg_states,
                            const TensorRef& findings_final,
                            const AttnParams& p);

}  // namespace rfsum
