#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mgadn/data.hpp"
#include "mgadn/model.hpp"
#include "mgadn/mtl.hpp"
#include "mgadn/trainer.hpp"

namespace mgadn::cli {

namespace fs = std::filesystem;

struct SynthCommand {
  SynthOptions options;
  std::string label_column = "label";
  fs::path out;
};

// Everything that shapes a training run. Field defaults are the tool defaults.
struct RunConfig {
  fs::path data;
  std::optional<std::string> label_column;  // auto-detects "label" when unset
  std::size_t window = 5;
  std::size_t top_k = 5;
  std::size_t embed_dim = 16;
  std::size_t latent = 0;  // 0 selects max(2, N/2)
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string mode = "mgda_ub";
  double c_pred = 0.5;
  double c_recon = 0.5;
  std::size_t alt_period = 1;
  bool no_vae_head = false;
  bool no_pred_head = false;
  bool no_shared_layer = false;
  bool no_mgda = false;
  SplitRatios splits;

  void validate() const;
  ModelConfig model_config(std::size_t n_sensors) const;
  // no_mgda forces alternating training.
  CombinationMode combination() const;
  std::string to_json() const;
};

struct TrainCommand {
  RunConfig config;
  fs::path out;
  std::optional<fs::path> log;  // per-epoch log; stdout when unset
};

struct EvalCommand {
  fs::path checkpoint;
  fs::path data;
  std::optional<std::string> label_column;
  Split split = Split::test;
  fs::path out;
  bool per_sensor = false;
};

struct ExportGraphCommand {
  fs::path checkpoint;
  fs::path adjacency_out;
  fs::path similarity_out;
};

struct PlotCommand {
  fs::path scores;
  fs::path out;
};

void cmd_synth(const SynthCommand& cmd, std::ostream& out);
void cmd_train(const TrainCommand& cmd, std::ostream& out);
void cmd_eval(const EvalCommand& cmd, std::ostream& out);
void cmd_export_graph(const ExportGraphCommand& cmd, std::ostream& out);
void cmd_plot(const PlotCommand& cmd, std::ostream& out);

// Resolves the label column for a CSV: an explicit name must exist; without
// one, `fallback` is used when the header contains it.
std::optional<std::string> resolve_label_column(const fs::path& csv, const std::optional<std::string>& requested,
                                                const std::optional<std::string>& fallback);

}  // namespace mgadn::cli
