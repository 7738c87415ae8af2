#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rfsum/errors.hpp"

namespace rfsum {

// Dense row-major tensor of doubles with an attached gradient slot.
// Rank 1 and rank 2 are the only shapes the ops accept.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;  // values, row-major
  std::vector<double> g;  // gradient, same layout; empty until needed
  bool requires_grad = false;

  int size() const {
    int s = 1;
    for (int d : shape) s *= d;
    return s;
  }
  int ndim() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape[0]; }
  int cols() const { return ndim() == 2 ? shape[1] : 1; }

  double& at(int i) { return v[i]; }
  double at(int i) const { return v[i]; }
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols() + c]; }

  void set_requires_grad(bool on) {
    requires_grad = on;
    if (on) g.assign(v.size(), 0.0);
    else g.clear();
  }
  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), 0.0);
  }
  void zero_grad() {
    if (!g.empty()) g.assign(g.size(), 0.0);
  }
};

using TensorRef = std::shared_ptr<Tensor>;

TensorRef make_tensor(std::vector<int> shape, bool requires_grad = false);
TensorRef make_tensor(std::vector<int> shape, std::vector<double> values,
                      bool requires_grad = false);
TensorRef scalar_tensor(double value, bool requires_grad = false);

// Records forward ops and replays their adjoints in reverse order.
// A graph and the tensors flowing through it belong to one thread for the
// duration of a forward/backward pass; separate graphs are independent.
// Gradients accumulate (+=) into Tensor::g; callers zero them between passes.
class Graph {
 public:
  TensorRef matmul(const TensorRef& a, const TensorRef& b);
  TensorRef matvec(const TensorRef& m, const TensorRef& x);
  TensorRef vecmat(const TensorRef& x, const TensorRef& m);
  TensorRef dot(const TensorRef& a, const TensorRef& b);
  // Same-shape addition, or matrix + row-vector broadcast ([m x n] + [n]).
  TensorRef add(const TensorRef& a, const TensorRef& b);
  TensorRef mul(const TensorRef& a, const TensorRef& b);
  TensorRef scale(const TensorRef& a, double c);
  TensorRef tanh(const TensorRef& a);
  TensorRef sigmoid(const TensorRef& a);
  TensorRef softmax(const TensorRef& a);
  TensorRef concat(const std::vector<TensorRef>& parts);
  TensorRef slice(const TensorRef& a, int begin, int len);
  TensorRef row(const TensorRef& m, int r);
  TensorRef stack_rows(const std::vector<TensorRef>& rows);
  TensorRef sum(const TensorRef& a);
  // rows[N x k] * w[a x k]^T + bias[a], broadcast over rows -> [N x a]
  TensorRef linear_rows(const TensorRef& rows, const TensorRef& w,
                        const TensorRef& bias);
  TensorRef lookup(const TensorRef& table, const std::vector<int>& ids);
  TensorRef embed(const TensorRef& table, int id);
  // Generate/copy mixture over the extended vocabulary:
  //   out[j] = p_gen * p_vocab[j]                      for j < |p_vocab|
  //   out[src_ext_ids[i]] += (1 - p_gen) * attn[i]     for every source pos i
  TensorRef pointer_mixture(const TensorRef& p_gen, const TensorRef& p_vocab,
                            const TensorRef& attn,
                            const std::vector<int>& src_ext_ids,
                            int extended_size);
  TensorRef neg_log_pick(const TensorRef& dist, int index);

  // Seeds d(loss) = seed and runs all recorded adjoints once, newest first.
  void backward(const TensorRef& loss, double seed = 1.0);

  size_t node_count() const { return nodes_.size(); }

  // With gradients disabled no adjoints are recorded and outputs do not
  // request gradients, so pure inference skips the tape entirely.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  friend class GraphTest;
  void record(const TensorRef& out, std::function<void()> back);
  std::vector<std::function<void()>> nodes_;
  bool grad_enabled_ = true;
};

// Scoped gradient disable for a graph.
class NoGradGuard {
 public:
  explicit NoGradGuard(Graph& g) : g_(g), prev_(g.grad_enabled()) {
    g_.set_grad_enabled(false);
  }
  ~NoGradGuard() { g_.set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Graph& g_;
  bool prev_;
};

}  // namespace rfsum
