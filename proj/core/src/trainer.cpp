#include "mgadn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "mgadn/error.hpp"

namespace mgadn {

std::string format_epoch_line(const EpochStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "epoch=%zu l_pred=%.9g l_recon=%.9g alpha=%.6f wall_s=%.3f", s.epoch,
                s.losses.l_pred, s.losses.l_recon, s.alpha, s.wall_seconds);
  return buf;
}

std::vector<EpochStats> train(Model& model, const WindowBatch& data, const TrainOptions& options) {
  if (data.empty()) throw ConfigError("training split has no windows");
  if (options.batch_size == 0) throw ConfigError("batch size must be positive");
  options.mode.validate();

  Rng rng(options.seed);
  Adam adam(options.adam);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const Window*> batch;
  std::vector<EpochStats> history;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng.engine());
    EpochStats stats;
    stats.epoch = epoch + 1;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&data.windows[order[i]]);
      StepResult r;
      try {
        r = combined_step(model, batch, options.mode, adam, rng, epoch);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + ", step " + std::to_string(steps + 1) + ": " +
                           e.what());
      }
      stats.losses.l_pred += r.losses.l_pred;
      stats.losses.l_recon += r.losses.l_recon;
      stats.alpha += r.alpha;
      ++steps;
    }
    stats.losses.l_pred /= static_cast<double>(steps);
    stats.losses.l_recon /= static_cast<double>(steps);
    stats.alpha /= static_cast<double>(steps);
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (options.log) *options.log << format_epoch_line(stats) << '\n' << std::flush;
    history.push_back(stats);
  }
  return history;
}

}  // namespace mgadn
