#include "rfsum/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rfsum/kernels.hpp"

namespace rfsum {

namespace {

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape[i]);
  }
  return s + "]";
}

void check_finite(const Tensor& t, const char* op) {
  for (double x : t.v) {
    if (!std::isfinite(x)) throw NonFiniteValue(std::string(op) + " produced a non-finite value");
  }
}

}  // namespace

TensorRef make_tensor(std::vector<int> shape, bool requires_grad) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->v.assign(t->size(), 0.0);
  t->set_requires_grad(requires_grad);
  return t;
}

TensorRef make_tensor(std::vector<int> shape, std::vector<double> values,
                      bool requires_grad) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->v = std::move(values);
  if (static_cast<int>(t->v.size()) != t->size())
    throw ShapeMismatch("value count does not match shape");
  t->set_requires_grad(requires_grad);
  return t;
}

TensorRef scalar_tensor(double value, bool requires_grad) {
  return make_tensor({1}, {value}, requires_grad);
}

void Graph::record(const TensorRef& out, std::function<void()> back) {
  if (!grad_enabled_) {
    out->requires_grad = false;  // downstream ops stay off the tape too
    return;
  }
  if (!out->requires_grad) return;
  // Replay runs newest first, so every consumer has already accumulated into
  // out->g by the time this node runs. An untouched (never allocated) output
  // gradient marks a node off the loss path: skip it instead of reading an
  // empty buffer.
  nodes_.push_back([out, f = std::move(back)] {
    if (!out->g.empty()) f();
  });
}

void Graph::backward(const TensorRef& loss, double seed) {
  if (loss->size() != 1) throw NotScalar("backward requires a scalar loss");
  loss->ensure_grad();
  loss->g[0] += seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  nodes_.clear();
}

TensorRef Graph::matmul(const TensorRef& a, const TensorRef& b) {
  if (a->ndim() != 2 || b->ndim() != 2 || a->cols() != b->rows())
    throw ShapeMismatch("matmul " + shape_str(*a) + " x " + shape_str(*b));
  const int m = a->rows(), k = a->cols(), n = b->cols();
  auto out = make_tensor({m, n});
  kernels::mm_nn(a->v.data(), b->v.data(), out->v.data(), m, k, n);
  check_finite(*out, "matmul");
  out->requires_grad = a->requires_grad || b->requires_grad;
  record(out, [a, b, out, m, k, n] {
    if (a->requires_grad) {
      a->ensure_grad();
      kernels::mm_nt(out->g.data(), b->v.data(), a->g.data(), m, n, k, true);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      kernels::mm_tn(a->v.data(), out->g.data(), b->g.data(), k, m, n, true);
    }
  });
  return out;
}

TensorRef Graph::matvec(const TensorRef& m, const TensorRef& x) {
  if (m->ndim() != 2 || x->ndim() != 1 || m->cols() != x->size())
    throw ShapeMismatch("matvec " + shape_str(*m) + " x " + shape_str(*x));
  const int rows = m->rows(), cols = m->cols();
  auto out = make_tensor({rows});
  kernels::mm_nn(m->v.data(), x->v.data(), out->v.data(), rows, cols, 1);
  check_finite(*out, "matvec");
  out->requires_grad = m->requires_grad || x->requires_grad;
  record(out, [m, x, out, rows, cols] {
    if (m->requires_grad) {
      m->ensure_grad();
      // dM += g * x^T
      kernels::mm_nn(out->g.data(), x->v.data(), m->g.data(), rows, 1, cols, true);
    }
    if (x->requires_grad) {
      x->ensure_grad();
      // dx += M^T * g
      kernels::mm_tn(m->v.data(), out->g.data(), x->g.data(), cols, rows, 1, true);
    }
  });
  return out;
}

TensorRef Graph::vecmat(const TensorRef& x, const TensorRef& m) {
  if (x->ndim() != 1 || m->ndim() != 2 || x->size() != m->rows())
    throw ShapeMismatch("vecmat " + shape_str(*x) + " x " + shape_str(*m));
  const int rows = m->rows(), cols = m->cols();
  auto out = make_tensor({cols});
  kernels::mm_tn(m->v.data(), x->v.data(), out->v.data(), cols, rows, 1);
  check_finite(*out, "vecmat");
  out->requires_grad = m->requires_grad || x->requires_grad;
  record(out, [m, x, out, rows, cols] {
    if (x->requires_grad) {
      x->ensure_grad();
      // dx += M * g
      kernels::mm_nn(m->v.data(), out->g.data(), x->g.data(), rows, cols, 1, true);
    }
    if (m->requires_grad) {
      m->ensure_grad();
      // dM += x * g^T
      kernels::mm_nn(x->v.data(), out->g.data(), m->g.data(), rows, 1, cols, true);
    }
  });
  return out;
}

TensorRef Graph::dot(const TensorRef& a, const TensorRef& b) {
  if (a->ndim() != 1 || b->ndim() != 1 || a->size() != b->size())
    throw ShapeMismatch("dot " + shape_str(*a) + " . " + shape_str(*b));
  double acc = 0.0;
  for (int i = 0; i < a->size(); ++i) acc += a->v[i] * b->v[i];
  auto out = scalar_tensor(acc);
  check_finite(*out, "dot");
  out->requires_grad = a->requires_grad || b->requires_grad;
  record(out, [a, b, out] {
    const double g = out->g[0];
    if (a->requires_grad) {
      a->ensure_grad();
      for (int i = 0; i < a->size(); ++i) a->g[i] += g * b->v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (int i = 0; i < b->size(); ++i) b->g[i] += g * a->v[i];
    }
  });
  return out;
}

TensorRef Graph::add(const TensorRef& a, const TensorRef& b) {
  const bool broadcast =
      a->ndim() == 2 && b->ndim() == 1 && a->cols() == b->size();
  if (!broadcast && a->shape != b->shape)
    throw ShapeMismatch("add " + shape_str(*a) + " + " + shape_str(*b));
  auto out = make_tensor(a->shape);
  if (broadcast) {
    const int rows = a->rows(), cols = a->cols();
    for (int r = 0; r < rows; ++r)
      kernels::vadd(a->v.data() + static_cast<size_t>(r) * cols, b->v.data(),
                    out->v.data() + static_cast<size_t>(r) * cols, cols);
  } else {
    kernels::vadd(a->v.data(), b->v.data(), out->v.data(), a->size());
  }
  check_finite(*out, "add");
  out->requires_grad = a->requires_grad || b->requires_grad;
  record(out, [a, b, out, broadcast] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < a->g.size(); ++i) a->g[i] += out->g[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      if (broadcast) {
        const int rows = a->rows(), cols = a->cols();
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            b->g[c] += out->g[static_cast<size_t>(r) * cols + c];
      } else {
        for (size_t i = 0; i < b->g.size(); ++i) b->g[i] += out->g[i];
      }
    }
  });
  return out;
}

TensorRef Graph::mul(const TensorRef& a, const TensorRef& b) {
  if (a->shape != b->shape)
    throw ShapeMismatch("mul " + shape_str(*a) + " * " + shape_str(*b));
  auto out = make_tensor(a->shape);
  kernels::vmul(a->v.data(), b->v.data(), out->v.data(), a->size());
  check_finite(*out, "mul");
  out->requires_grad = a->requires_grad || b->requires_grad;
  record(out, [a, b, out] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (int i = 0; i < a->size(); ++i) a->g[i] += out->g[i] * b->v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (int i = 0; i < b->size(); ++i) b->g[i] += out->g[i] * a->v[i];
    }
  });
  return out;
}

TensorRef Graph::scale(const TensorRef& a, double c) {
  auto out = make_tensor(a->shape);
  kernels::vscale(a->v.data(), c, out->v.data(), a->size());
  check_finite(*out, "scale");
  out->requires_grad = a->requires_grad;
  record(out, [a, out, c] {
    a->ensure_grad();
    for (int i = 0; i < a->size(); ++i) a->g[i] += c * out->g[i];
  });
  return out;
}

TensorRef Graph::tanh(const TensorRef& a) {
  auto out = make_tensor(a->shape);
  kernels::vtanh(a->v.data(), out->v.data(), a->size());
  check_finite(*out, "tanh");
  out->requires_grad = a->requires_grad;
  record(out, [a, out] {
    a->ensure_grad();
    for (int i = 0; i < a->size(); ++i)
      a->g[i] += out->g[i] * (1.0 - out->v[i] * out->v[i]);
  });
  return out;
}

TensorRef Graph::sigmoid(const TensorRef& a) {
  auto out = make_tensor(a->shape);
  kernels::vsigmoid(a->v.data(), out->v.data(), a->size());
  check_finite(*out, "sigmoid");
  out->requires_grad = a->requires_grad;
  record(out, [a, out] {
    a->ensure_grad();
    for (int i = 0; i < a->size(); ++i)
      a->g[i] += out->g[i] * out->v[i] * (1.0 - out->v[i]);
  });
  return out;
}

TensorRef Graph::softmax(const TensorRef& a) {
  if (a->ndim() != 1 || a->size() < 1)
    throw ShapeMismatch("softmax needs a non-empty vector");
  auto out = make_tensor(a->shape);
  const int n = a->size();
  double mx = a->v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, a->v[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    out->v[i] = std::exp(a->v[i] - mx);
    z += out->v[i];
  }
  for (int i = 0; i < n; ++i) out->v[i] /= z;
  check_finite(*out, "softmax");
  out->requires_grad = a->requires_grad;
  record(out, [a, out, n] {
    a->ensure_grad();
    double inner = 0.0;
    for (int i = 0; i < n; ++i) inner += out->g[i] * out->v[i];
    for (int i = 0; i < n; ++i) a->g[i] += out->v[i] * (out->g[i] - inner);
  });
  return out;
}

TensorRef Graph::concat(const std::vector<TensorRef>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat of nothing");
  int total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p->ndim() != 1) throw ShapeMismatch("concat expects vectors");
    total += p->size();
    rg = rg || p->requires_grad;
  }
  auto out = make_tensor({total});
  int off = 0;
  for (const auto& p : parts) {
    std::copy(p->v.begin(), p->v.end(), out->v.begin() + off);
    off += p->size();
  }
  out->requires_grad = rg;
  record(out, [parts, out] {
    int off = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        for (int i = 0; i < p->size(); ++i) p->g[i] += out->g[off + i];
      }
      off += p->size();
    }
  });
  return out;
}

TensorRef Graph::slice(const TensorRef& a, int begin, int len) {
  if (a->ndim() != 1 || begin < 0 || len < 0 || begin + len > a->size())
    throw ShapeMismatch("slice out of range");
  auto out = make_tensor({len});
  std::copy(a->v.begin() + begin, a->v.begin() + begin + len, out->v.begin());
  out->requires_grad = a->requires_grad;
  record(out, [a, out, begin, len] {
    a->ensure_grad();
    for (int i = 0; i < len; ++i) a->g[begin + i] += out->g[i];
  });
  return out;
}

TensorRef Graph::row(const TensorRef& m, int r) {
  if (m->ndim() != 2 || r < 0 || r >= m->rows())
    throw ShapeMismatch("row out of range");
  const int cols = m->cols();
  auto out = make_tensor({cols});
  std::copy(m->v.begin() + static_cast<size_t>(r) * cols,
            m->v.begin() + static_cast<size_t>(r + 1) * cols, out->v.begin());
  out->requires_grad = m->requires_grad;
  record(out, [m, out, r, cols] {
    m->ensure_grad();
    for (int c = 0; c < cols; ++c)
      m->g[static_cast<size_t>(r) * cols + c] += out->g[c];
  });
  return out;
}

TensorRef Graph::stack_rows(const std::vector<TensorRef>& rows) {
  if (rows.empty()) throw ShapeMismatch("stack_rows of nothing");
  const int cols = rows[0]->size();
  bool rg = false;
  for (const auto& r : rows) {
    if (r->ndim() != 1 || r->size() != cols)
      throw ShapeMismatch("stack_rows expects equal-length vectors");
    rg = rg || r->requires_grad;
  }
  auto out = make_tensor({static_cast<int>(rows.size()), cols});
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i]->v.begin(), rows[i]->v.end(),
              out->v.begin() + i * static_cast<size_t>(cols));
  out->requires_grad = rg;
  record(out, [rows, out, cols] {
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]->requires_grad) continue;
      rows[i]->ensure_grad();
      for (int c = 0; c < cols; ++c)
        rows[i]->g[c] += out->g[i * static_cast<size_t>(cols) + c];
    }
  });
  return out;
}

TensorRef Graph::sum(const TensorRef& a) {
  double acc = 0.0;
  for (double x : a->v) acc += x;
  auto out = scalar_tensor(acc);
  check_finite(*out, "sum");
  out->requires_grad = a->requires_grad;
  record(out, [a, out] {
    a->ensure_grad();
    for (int i = 0; i < a->size(); ++i) a->g[i] += out->g[0];
  });
  return out;
}

TensorRef Graph::linear_rows(const TensorRef& rows, const TensorRef& w,
                             const TensorRef& bias) {
  if (rows->ndim() != 2 || w->ndim() != 2 || rows->cols() != w->cols() ||
      bias->ndim() != 1 || bias->size() != w->rows())
    throw ShapeMismatch("linear_rows " + shape_str(*rows) + " with " +
                        shape_str(*w));
  const int n = rows->rows(), k = rows->cols(), a = w->rows();
  auto out = make_tensor({n, a});
  kernels::mm_nt(rows->v.data(), w->v.data(), out->v.data(), n, k, a);
  for (int r = 0; r < n; ++r)
    kernels::vadd(out->v.data() + static_cast<size_t>(r) * a, bias->v.data(),
                  out->v.data() + static_cast<size_t>(r) * a, a);
  check_finite(*out, "linear_rows");
  out->requires_grad =
      rows->requires_grad || w->requires_grad || bias->requires_grad;
  record(out, [rows, w, bias, out, n, k, a] {
    if (rows->requires_grad) {
      rows->ensure_grad();
      kernels::mm_nn(out->g.data(), w->v.data(), rows->g.data(), n, a, k, true);
    }
    if (w->requires_grad) {
      w->ensure_grad();
      kernels::mm_tn(out->g.data(), rows->v.data(), w->g.data(), a, n, k, true);
    }
    if (bias->requires_grad) {
      bias->ensure_grad();
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < a; ++c)
          bias->g[c] += out->g[static_cast<size_t>(r) * a + c];
    }
  });
  return out;
}

TensorRef Graph::lookup(const TensorRef& table, const std::vector<int>& ids) {
  if (table->ndim() != 2) throw ShapeMismatch("lookup table must be 2-d");
  const int v = table->rows(), d = table->cols();
  for (int id : ids)
    if (id < 0 || id >= v)
      throw IdOutOfRange("token id " + std::to_string(id) + " not in [0, " +
                         std::to_string(v) + ")");
  auto out = make_tensor({static_cast<int>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i)
    std::copy(table->v.begin() + static_cast<size_t>(ids[i]) * d,
              table->v.begin() + static_cast<size_t>(ids[i] + 1) * d,
              out->v.begin() + i * static_cast<size_t>(d));
  out->requires_grad = table->requires_grad;
  record(out, [table, out, ids, d] {
    table->ensure_grad();
    for (size_t i = 0; i < ids.size(); ++i)
      for (int c = 0; c < d; ++c)
        table->g[static_cast<size_t>(ids[i]) * d + c] +=
            out->g[i * static_cast<size_t>(d) + c];
  });
  return out;
}

TensorRef Graph::embed(const TensorRef& table, int id) {
  if (table->ndim() != 2) throw ShapeMismatch("embed table must be 2-d");
  if (id < 0 || id >= table->rows())
    throw IdOutOfRange("token id " + std::to_string(id) + " not in [0, " +
                       std::to_string(table->rows()) + ")");
  const int d = table->cols();
  auto out = make_tensor({d});
  std::copy(table->v.begin() + static_cast<size_t>(id) * d,
            table->v.begin() + static_cast<size_t>(id + 1) * d, out->v.begin());
  out->requires_grad = table->requires_grad;
  record(out, [table, out, id, d] {
    table->ensure_grad();
    for (int c = 0; c < d; ++c)
      table->g[static_cast<size_t>(id) * d + c] += out->g[c];
  });
  return out;
}

TensorRef Graph::pointer_mixture(const TensorRef& p_gen,
                                 const TensorRef& p_vocab,
                                 const TensorRef& attn,
                                 const std::vector<int>& src_ext_ids,
                                 int extended_size) {
  if (p_gen->size() != 1) throw ShapeMismatch("p_gen must be scalar");
  if (p_vocab->ndim() != 1 || attn->ndim() != 1)
    throw ShapeMismatch("pointer_mixture expects vectors");
  if (attn->size() != static_cast<int>(src_ext_ids.size()))
    throw ShapeMismatch("attention length != source length");
  if (extended_size < p_vocab->size())
    throw ShapeMismatch("extended vocabulary smaller than base");
  for (int id : src_ext_ids)
    if (id < 0 || id >= extended_size)
      throw IdOutOfRange("source extended id out of range");
  const int base = p_vocab->size();
  const double pg = p_gen->v[0];
  auto out = make_tensor({extended_size});
  for (int j = 0; j < base; ++j) out->v[j] = pg * p_vocab->v[j];
  for (size_t i = 0; i < src_ext_ids.size(); ++i)
    out->v[src_ext_ids[i]] += (1.0 - pg) * attn->v[i];
  check_finite(*out, "pointer_mixture");
  out->requires_grad =
      p_gen->requires_grad || p_vocab->requires_grad || attn->requires_grad;
  record(out, [p_gen, p_vocab, attn, out, src_ext_ids, base] {
    const double pg = p_gen->v[0];
    if (p_gen->requires_grad) {
      p_gen->ensure_grad();
      double acc = 0.0;
      for (int j = 0; j < base; ++j) acc += out->g[j] * p_vocab->v[j];
      for (size_t i = 0; i < src_ext_ids.size(); ++i)
        acc -= out->g[src_ext_ids[i]] * attn->v[i];
      p_gen->g[0] += acc;
    }
    if (p_vocab->requires_grad) {
      p_vocab->ensure_grad();
      for (int j = 0; j < base; ++j) p_vocab->g[j] += out->g[j] * pg;
    }
    if (attn->requires_grad) {
      attn->ensure_grad();
      for (size_t i = 0; i < src_ext_ids.size(); ++i)
        attn->g[i] += out->g[src_ext_ids[i]] * (1.0 - pg);
    }
  });
  return out;
}

TensorRef Graph::neg_log_pick(const TensorRef& dist, int index) {
  if (dist->ndim() != 1) throw ShapeMismatch("neg_log_pick expects a vector");
  if (index < 0 || index >= dist->size())
    throw IdOutOfRange("pick index out of range");
  const double p = dist->v[index];
  auto out = scalar_tensor(-std::log(p));
  check_finite(*out, "neg_log_pick");
  out->requires_grad = dist->requires_grad;
  record(out, [dist, out, index] {
    dist->ensure_grad();
    dist->g[index] += -out->g[0] / dist->v[index];
  });
  return out;
}

}  // namespace rfsum
