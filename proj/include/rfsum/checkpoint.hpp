#pragma once

#include <string>

#include "rfsum/model.hpp"
#include "rfsum/training.hpp"

namespace rfsum {

// On-disk layout (format version 1):
//   line 1: a single-line JSON manifest - format version, kind, model config,
//           vocabulary, epoch/dev metadata, and an ordered tensor directory
//           of {name, shape} entries
//   then:   the tensors' values as raw little-endian doubles, row-major,
//           concatenated in directory order
// Train-state files additionally carry the training config, optimizer step,
// stopping counters, the best model under "best."-prefixed names, and the
// Adam moments under "adam.m." / "adam.v." prefixes.

struct ModelCheckpoint {
  Model model;
  int epoch = -1;
  double dev_nll = std::numeric_limits<double>::infinity();
};

void save_model_checkpoint(const std::string& path, const Model& m, int epoch,
                           double dev_nll);
ModelCheckpoint load_model_checkpoint(const std::string& path);

struct TrainCheckpoint {
  Model current;      // the live (last-epoch) model
  TrainState state;   // optimizer, best model, stopping counters
  TrainConfig config;
};

void save_train_checkpoint(const std::string& path, const Model& current,
                           const TrainState& state, const TrainConfig& cfg);
TrainCheckpoint load_train_checkpoint(const std::string& path);

// Reads just the manifest's kind field ("model" or "train_state").
std::string checkpoint_kind(const std::string& path);

}  // namespace rfsum
