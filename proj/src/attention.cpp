#include "rfsum/attention.hpp"

#include "rfsum/errors.hpp"

namespace rfsum {

AttnParams init_attention(int state_dim, int query_dim, int attn_dim, Rng& rng) {
  AttnParams p;
  p.W_h = make_tensor({attn_dim, state_dim}, true);
  p.W_s = make_tensor({attn_dim, query_dim}, true);
  p.v = make_tensor({attn_dim}, true);
  p.bias = make_tensor({attn_dim}, true);
  for (auto* t : {&p.W_h, &p.W_s, &p.v, &p.bias})
    for (auto& x : (*t)->v) x = rng.uniform(-0.08, 0.08);
  return p;
}

AttentionResult attend_scores(Graph& g, const TensorRef& states,
                              const TensorRef& scores) {
  if (states->ndim() != 2 || states->rows() < 1)
    throw EmptyStates("attention needs at least one state");
  if (scores->ndim() != 1 || scores->size() != states->rows())
    throw ShapeMismatch("one attention score per state required");
  AttentionResult res;
  res.weights = g.softmax(scores);
  res.context = g.vecmat(res.weights, states);
  return res;
}

TensorRef attention_keys(Graph& g, const TensorRef& states, const AttnParams& p) {
  if (states->ndim() != 2 || states->rows() < 1)
    throw EmptyStates("attention needs at least one state");
  auto zero = make_tensor({p.dim()});
  return g.linear_rows(states, p.W_h, zero);  // [N x a]
}

AttentionResult attend_with_keys(Graph& g, const TensorRef& states,
                                 const TensorRef& keys, const TensorRef& query,
                                 const AttnParams& p) {
  auto shift = g.add(g.matvec(p.W_s, query), p.bias);  // [a]
  auto hidden = g.tanh(g.add(keys, shift));            // [N x a] broadcast
  auto scores = g.matvec(hidden, p.v);                 // [N]
  return attend_scores(g, states, scores);
}

AttentionResult attend(Graph& g, const TensorRef& states, const TensorRef& query,
                       const AttnParams& p) {
  return attend_with_keys(g, states, attention_keys(g, states, p), query, p);
}

TensorRef background_vector(Graph& g, const TensorRef& bg_states,
                            const TensorRef& findings_final,
                            const AttnParams& p) {
  return attend(g, bg_states, findings_final, p).context;
}

}  // namespace rfsum
