#pragma once

#include <utility>
#include <vector>

#include "rfsum/rng.hpp"
#include "rfsum/tensor.hpp"

namespace rfsum {

// One LSTM cell: W is [4h x in_dim], b is [4h], gates packed in the order
// input, forget, output, candidate.
struct LstmParams {
  TensorRef W;
  TensorRef b;
  int hidden() const { return W->rows() / 4; }
  int input_dim() const { return W->cols(); }
};

// Uniform [-0.08, 0.08] weights; forget-gate bias raised to forget_bias.
LstmParams init_lstm(int in_dim, int hidden, Rng& rng, double forget_bias = 1.0);

// Gate equations over an already-assembled input vector:
//   [i f o u] = W * input + b
//   c = sigmoid(f) .* c_prev + sigmoid(i) .* tanh(u)
//   s = sigmoid(o) .* tanh(c)
std::pair<TensorRef, TensorRef> lstm_gates(Graph& g, const TensorRef& input,
                                           const TensorRef& c_prev,
                                           const LstmParams& p);

// Standard cell wiring: input = [x; s_prev].
std::pair<TensorRef, TensorRef> lstm_cell(Graph& g, const TensorRef& x,
                                          const TensorRef& s_prev,
                                          const TensorRef& c_prev,
                                          const LstmParams& p);

// Stacked bidirectional LSTM: layer 0 reads embeddings, deeper layers read the
// concatenated bidirectional output of the layer below.
struct BiRnnParams {
  std::vector<LstmParams> fwd;  // one per layer
  std::vector<LstmParams> bwd;
  int hidden = 0;
  int layers() const { return static_cast<int>(fwd.size()); }
};

BiRnnParams init_birnn(int input_dim, int hidden, int layers, Rng& rng);

struct EncoderOutput {
  TensorRef states;  // [N x 2h]: per position, forward and backward halves
  TensorRef final;   // [2h]: last forward state then last backward state
};

// Runs the stacked bidirectional encoder over embedded tokens [N x d].
// Initial recurrent states are zero.
EncoderOutput encode(Graph& g, const TensorRef& embedded, const BiRnnParams& p);

// The background encoder is the same machinery with its own parameters.
EncoderOutput encode_background(Graph& g, const TensorRef& embedded,
                                const BiRnnParams& p);

}  // namespace rfsum
