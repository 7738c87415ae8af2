#include "rfsum/training.hpp"

#include <cmath>

#include "rfsum/errors.hpp"
#include "rfsum/rng.hpp"

namespace rfsum {

TensorRef nll_loss(Graph& g, const std::vector<TensorRef>& dists,
                   const std::vector<int>& targets) {
  if (dists.size() != targets.size())
    throw LengthMismatch("got " + std::to_string(dists.size()) +
                         " distributions for " + std::to_string(targets.size()) +
                         " targets");
  if (dists.empty()) throw EmptyList("no targets to score");
  TensorRef total;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    auto nll = g.neg_log_pick(dists[i], targets[i]);
    total = total ? g.add(total, nll) : nll;
  }
  return g.scale(total, 1.0 / static_cast<double>(dists.size()));
}

ExampleLoss example_loss(Graph& g, const Model& m, const Report& r) {
  Encoded ex = encode_example(g, m, r);
  std::vector<int> targets = ex.ext.encode(r.impression);
  targets.push_back(Vocabulary::kEos);

  std::vector<TensorRef> dists;
  dists.reserve(targets.size());
  TensorRef s = ex.s0, c = ex.c0;
  int prev = Vocabulary::kSos;
  for (int tgt : targets) {
    DecoderStep step = decode_step(g, m, ex, s, c, prev);
    dists.push_back(step.dist);
    s = step.s;
    c = step.c;
    prev = tgt;
  }
  ExampleLoss out;
  out.loss = nll_loss(g, dists, targets);
  out.tokens = static_cast<int>(targets.size());
  return out;
}

double dataset_nll(const Model& m, const std::vector<Report>& reports) {
  if (reports.empty()) throw EmptySplit("no reports to score");
  double total = 0.0;
  long long tokens = 0;
  for (const auto& r : reports) {
    Graph g;
    NoGradGuard guard(g);
    ExampleLoss el = example_loss(g, m, r);
    total += el.loss->v[0] * el.tokens;
    tokens += el.tokens;
  }
  return total / static_cast<double>(tokens);
}

double grad_norm(const std::vector<std::pair<std::string, TensorRef>>& params) {
  double sq = 0.0;
  for (const auto& [name, t] : params) {
    if (t->g.empty()) continue;
    for (double x : t->g) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_gradients(
    const std::vector<std::pair<std::string, TensorRef>>& params,
    double max_norm) {
  double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (const auto& [name, t] : params)
      for (double& x : t->g) x *= scale;
  }
  return norm;
}

void adam_step(const std::vector<std::pair<std::string, TensorRef>>& params,
               AdamState& state, const TrainConfig& cfg) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (const auto& [name, t] : params) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(t->v.size(), 0.0);
    if (v.empty()) v.assign(t->v.size(), 0.0);
    if (m.size() != t->v.size())
      throw ShapeMismatch("optimizer slot '" + name + "' has wrong size");
    t->ensure_grad();
    for (std::size_t i = 0; i < t->v.size(); ++i) {
      double gi = t->g[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      t->v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

bool EarlyStopper::update(double dev) {
  if (dev < best_) {
    best_ = dev;
    bad_epochs_ = 0;
    return true;
  }
  bad_epochs_ += 1;
  return false;
}

void train(Model& m, const std::vector<Report>& train_set,
           const std::vector<Report>& dev_set, const TrainConfig& cfg,
           TrainState& state, const TrainLogger& log) {
  if (train_set.empty()) throw EmptySplit("training split is empty");
  if (dev_set.empty()) throw EmptySplit("dev split is empty");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1)
    throw InvalidArgument("batch size, epochs, and patience must be positive");

  auto params = m.named_params();
  EarlyStopper stopper(cfg.patience);
  stopper.restore(state.best_dev, state.bad_epochs);

  for (int epoch = state.next_epoch; epoch < cfg.max_epochs; ++epoch) {
    if (stopper.should_stop()) break;

    // The visit order depends only on (seed, epoch), never on restarts.
    std::vector<int> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double train_total = 0.0;
    long long train_tokens = 0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      std::size_t batch_end = std::min(pos + cfg.batch_size, order.size());
      int batch_n = static_cast<int>(batch_end - pos);
      for (const auto& [name, t] : params) t->zero_grad();
      for (; pos < batch_end; ++pos) {
        Graph g;
        ExampleLoss el = example_loss(g, m, train_set[order[pos]]);
        g.backward(el.loss, 1.0 / batch_n);
        train_total += el.loss->v[0] * el.tokens;
        train_tokens += el.tokens;
      }
      clip_gradients(params, cfg.clip);
      adam_step(params, state.opt, cfg);
    }

    double dev = dataset_nll(m, dev_set);
    bool improved = stopper.update(dev);
    if (improved) {
      state.best = m.clone();
      state.best_dev = dev;
      state.best_epoch = epoch;
    }
    state.bad_epochs = stopper.bad_epochs();
    state.next_epoch = epoch + 1;

    if (log) {
      EpochLog entry;
      entry.epoch = epoch;
      entry.train_nll = train_total / static_cast<double>(train_tokens);
      entry.dev_nll = dev;
      entry.improved = improved;
      log(entry);
    }
  }
}

}  // namespace rfsum
