#include "rfsum/encoder.hpp"

#include "rfsum/errors.hpp"

namespace rfsum {

LstmParams init_lstm(int in_dim, int hidden, Rng& rng, double forget_bias) {
  LstmParams p;
  p.W = make_tensor({4 * hidden, in_dim}, true);
  p.b = make_tensor({4 * hidden}, true);
  for (auto& x : p.W->v) x = rng.uniform(-0.08, 0.08);
  for (auto& x : p.b->v) x = rng.uniform(-0.08, 0.08);
  for (int i = hidden; i < 2 * hidden; ++i) p.b->v[i] += forget_bias;
  return p;
}

std::pair<TensorRef, TensorRef> lstm_gates(Graph& g, const TensorRef& input,
                                           const TensorRef& c_prev,
                                           const LstmParams& p) {
  const int h = p.hidden();
  if (input->ndim() != 1 || input->size() != p.input_dim())
    throw ShapeMismatch("lstm input size " + std::to_string(input->size()) +
                        ", kernel expects " + std::to_string(p.input_dim()));
  if (c_prev->ndim() != 1 || c_prev->size() != h)
    throw ShapeMismatch("lstm cell state size mismatch");
  auto z = g.add(g.matvec(p.W, input), p.b);
  auto i = g.sigmoid(g.slice(z, 0, h));
  auto f = g.sigmoid(g.slice(z, h, h));
  auto o = g.sigmoid(g.slice(z, 2 * h, h));
  auto u = g.tanh(g.slice(z, 3 * h, h));
  auto c = g.add(g.mul(f, c_prev), g.mul(i, u));
  auto s = g.mul(o, g.tanh(c));
  return {s, c};
}

std::pair<TensorRef, TensorRef> lstm_cell(Graph& g, const TensorRef& x,
                                          const TensorRef& s_prev,
                                          const TensorRef& c_prev,
                                          const LstmParams& p) {
  return lstm_gates(g, g.concat({x, s_prev}), c_prev, p);
}

BiRnnParams init_birnn(int input_dim, int hidden, int layers, Rng& rng) {
  if (layers < 1) throw InvalidArgument("encoder needs at least one layer");
  BiRnnParams p;
  p.hidden = hidden;
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? input_dim : 2 * hidden;
    p.fwd.push_back(init_lstm(in + hidden, hidden, rng));
    p.bwd.push_back(init_lstm(in + hidden, hidden, rng));
  }
  return p;
}

EncoderOutput encode(Graph& g, const TensorRef& embedded, const BiRnnParams& p) {
  if (embedded->ndim() != 2 || embedded->rows() < 1)
    throw EmptySequence("encoder input must have at least one row");
  const int n = embedded->rows();
  const int h = p.hidden;

  std::vector<TensorRef> layer_in(n);
  for (int i = 0; i < n; ++i) layer_in[i] = g.row(embedded, i);

  std::vector<TensorRef> fwd(n), bwd(n);
  for (int l = 0; l < p.layers(); ++l) {
    auto s = make_tensor({h});
    auto c = make_tensor({h});
    for (int i = 0; i < n; ++i) {
      std::tie(s, c) = lstm_cell(g, layer_in[i], s, c, p.fwd[l]);
      fwd[i] = s;
    }
    s = make_tensor({h});
    c = make_tensor({h});
    for (int i = n - 1; i >= 0; --i) {
      std::tie(s, c) = lstm_cell(g, layer_in[i], s, c, p.bwd[l]);
      bwd[i] = s;
    }
    for (int i = 0; i < n; ++i) layer_in[i] = g.concat({fwd[i], bwd[i]});
  }

  EncoderOutput out;
  out.states = g.stack_rows(layer_in);
  out.final = g.concat({fwd[n - 1], bwd[0]});
  return out;
}

EncoderOutput encode_background(Graph& g, const TensorRef& embedded,
                                const BiRnnParams& p) {
  return encode(g, embedded, p);
}

}  // namespace rfsum
