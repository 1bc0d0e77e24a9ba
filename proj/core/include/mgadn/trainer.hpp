#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "mgadn/data.hpp"
#include "mgadn/model.hpp"
#include "mgadn/mtl.hpp"

namespace mgadn {

struct TrainOptions {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  AdamOptions adam;
  CombinationMode mode;
  std::uint64_t seed = 0;
  // Receives one key=value line per epoch when set.
  std::ostream* log = nullptr;
};

struct EpochStats {
  std::size_t epoch = 0;
  LossPair losses;  // means over the epoch's steps
  double alpha = 0.0;
  double wall_seconds = 0.0;
};

// "epoch=3 l_pred=... l_recon=... alpha=... wall_s=..."
std::string format_epoch_line(const EpochStats& stats);

// Mini-batch training over `train` with windows shuffled each epoch from a
// generator seeded by options.seed. Deterministic for a fixed seed.
std::vector<EpochStats> train(Model& model, const WindowBatch& train, const TrainOptions& options);

}  // namespace mgadn
