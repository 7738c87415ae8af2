#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfsum/corpus.hpp"
#include "rfsum/model.hpp"

namespace rfsum {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient norm ceiling
  int batch_size = 16;
  int max_epochs = 20;
  int patience = 5;   // epochs without dev improvement before stopping
  std::uint64_t seed = 1;
};

// Mean negative log likelihood over aligned (distribution, target) pairs.
TensorRef nll_loss(Graph& g, const std::vector<TensorRef>& dists,
                   const std::vector<int>& targets);

// Teacher-forced loss for one report: the decoder consumes the gold history
// and scores impression tokens plus the closing <eos>.
struct ExampleLoss {
  TensorRef loss;  // mean NLL per target token
  int tokens = 0;  // number of scored targets
};
ExampleLoss example_loss(Graph& g, const Model& m, const Report& r);

// Per-token NLL over a whole set, without building a tape.
double dataset_nll(const Model& m, const std::vector<Report>& reports);

double grad_norm(const std::vector<std::pair<std::string, TensorRef>>& params);
// Rescales all gradients when their global norm exceeds max_norm; returns the
// pre-clip norm.
double clip_gradients(const std::vector<std::pair<std::string, TensorRef>>& params,
                      double max_norm);

struct AdamState {
  long long step = 0;
  std::unordered_map<std::string, std::vector<double>> m;
  std::unordered_map<std::string, std::vector<double>> v;
};

// One bias-corrected update over every parameter's accumulated gradient.
void adam_step(const std::vector<std::pair<std::string, TensorRef>>& params,
               AdamState& state, const TrainConfig& cfg);

class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when dev improves on the best seen so far.
  bool update(double dev);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  double best() const { return best_; }
  int bad_epochs() const { return bad_epochs_; }

  // Checkpoint plumbing.
  void restore(double best, int bad_epochs) {
    best_ = best;
    bad_epochs_ = bad_epochs;
  }
  int patience() const { return patience_; }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

// Everything training accumulates across epochs; serializing this plus the
// live model makes resumption bit-identical to an uninterrupted run.
struct TrainState {
  AdamState opt;
  Model best;          // deep copy of the best-dev model
  double best_dev = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int bad_epochs = 0;
  int next_epoch = 0;
};

struct EpochLog {
  int epoch;
  double train_nll;  // per token, over the examples as visited
  double dev_nll;    // per token
  bool improved;
};
using TrainLogger = std::function<void(const EpochLog&)>;

// Runs epochs state.next_epoch .. cfg.max_epochs-1 with early stopping.
// Examples are shuffled per epoch by a seed derived from (cfg.seed, epoch),
// so the visit order never depends on how training was segmented.
void train(Model& m, const std::vector<Report>& train_set,
           const std::vector<Report>& dev_set, const TrainConfig& cfg,
           TrainState& state, const TrainLogger& log = nullptr);

}  // namespace rfsum
