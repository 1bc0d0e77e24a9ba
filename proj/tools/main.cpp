#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace mgadn;
using namespace mgadn::cli;

int main(int argc, char** argv) {
  CLI::App app{"mgadn: two-headed graph-attention anomaly detector for multivariate time series"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  SynthCommand synth;
  auto* sc = app.add_subcommand("synth", "Generate a labeled synthetic dataset as CSV");
  sc->add_option("-o,--out", synth.out, "Output CSV path")->required();
  sc->add_option("--sensors", synth.options.n_sensors, "Number of sensors")->capture_default_str();
  sc->add_option("--steps", synth.options.n_steps, "Number of timestamps")->capture_default_str();
  sc->add_option("--rate", synth.options.anomaly_rate, "Target fraction of anomalous rows")->capture_default_str();
  sc->add_option("--seed", synth.options.seed, "Random seed")->capture_default_str();
  sc->add_option("--clean-fraction", synth.options.clean_fraction,
                 "Leading fraction of rows kept free of anomalies")
      ->capture_default_str();
  sc->add_option("--label-column", synth.label_column, "Name of the label column")->capture_default_str();

  TrainCommand train;
  auto& rc = train.config;
  auto* tc = app.add_subcommand("train", "Train a model and write a checkpoint");
  tc->add_option("-d,--data", rc.data, "Training CSV")->required();
  tc->add_option("-o,--out", train.out, "Checkpoint output path")->required();
  tc->add_option("--log", train.log, "Write the per-epoch log here instead of stdout");
  tc->add_option("--label-column", rc.label_column, "Label column to exclude from sensors (default: 'label' if present)");
  tc->add_option("--window", rc.window, "Sliding window length d")->capture_default_str();
  tc->add_option("--top-k", rc.top_k, "Neighbours per sensor k")->capture_default_str();
  tc->add_option("--embed-dim", rc.embed_dim, "Sensor embedding dimension w")->capture_default_str();
  tc->add_option("--latent", rc.latent, "VAE latent size (0: max(2, N/2))")->capture_default_str();
  tc->add_option("--epochs", rc.epochs, "Training epochs")->capture_default_str();
  tc->add_option("--batch-size", rc.batch_size, "Mini-batch size")->capture_default_str();
  tc->add_option("--lr", rc.lr, "Adam learning rate")->capture_default_str();
  tc->add_option("--seed", rc.seed, "Random seed for initialization, shuffling and sampling")->capture_default_str();
  tc->add_option("--mode", rc.mode, "Loss combination: mgda_ub, fixed or alternating")
      ->check(CLI::IsMember({"mgda_ub", "mgda", "fixed", "alternating", "alt"}))
      ->capture_default_str();
  tc->add_option("--c-pred", rc.c_pred, "Forecast loss weight in fixed mode")->capture_default_str();
  tc->add_option("--c-recon", rc.c_recon, "Reconstruction loss weight in fixed mode")->capture_default_str();
  tc->add_option("--alt-period", rc.alt_period, "Epochs per head in alternating mode")->capture_default_str();
  tc->add_flag("--no-vae-head", rc.no_vae_head, "Drop the reconstruction head");
  tc->add_flag("--no-pred-head", rc.no_pred_head, "Drop the forecast head");
  tc->add_flag("--no-shared-layer", rc.no_shared_layer, "Feed raw windows to both heads");
  tc->add_flag("--no-mgda", rc.no_mgda, "Train the heads alternately instead of with MGDA-UB");
  tc->add_option("--train-ratio", rc.splits.train, "Chronological train fraction")->capture_default_str();
  tc->add_option("--val-ratio", rc.splits.val, "Chronological validation fraction")->capture_default_str();
  tc->add_option("--test-ratio", rc.splits.test, "Chronological test fraction")->capture_default_str();

  EvalCommand eval;
  std::string eval_split = "test";
  auto* ec = app.add_subcommand("eval", "Score a dataset with a checkpoint and report metrics");
  ec->add_option("-c,--checkpoint", eval.checkpoint, "Checkpoint path")->required();
  ec->add_option("-d,--data", eval.data, "CSV with the checkpoint's sensors")->required();
  ec->add_option("-o,--out", eval.out, "Score CSV output path")->required();
  ec->add_option("--label-column", eval.label_column, "Label column (default: the one used in training)");
  ec->add_option("--split", eval_split, "Split to score")->check(CLI::IsMember({"val", "test"}))->capture_default_str();
  ec->add_flag("--per-sensor", eval.per_sensor, "Add per-sensor normalized score columns");

  ExportGraphCommand graph;
  auto* gc = app.add_subcommand("export-graph", "Write the learned adjacency and similarity matrices");
  gc->add_option("-c,--checkpoint", graph.checkpoint, "Checkpoint path")->required();
  gc->add_option("--adjacency", graph.adjacency_out, "Top-k adjacency CSV output")->required();
  gc->add_option("--similarity", graph.similarity_out, "Cosine similarity CSV output")->required();

  PlotCommand plot;
  auto* pc = app.add_subcommand("plot", "Render a score CSV as an SVG trace");
  pc->add_option("-s,--scores", plot.scores, "Score CSV from eval")->required();
  pc->add_option("-o,--out", plot.out, "SVG output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc->parsed()) cmd_synth(synth, std::cout);
    if (tc->parsed()) cmd_train(train, std::cout);
    if (ec->parsed()) {
      eval.split = split_from_name(eval_split);
      cmd_eval(eval, std::cout);
    }
    if (gc->parsed()) cmd_export_graph(graph, std::cout);
    if (pc->parsed()) cmd_plot(plot, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
