#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mgadn/checkpoint.hpp"
#include "mgadn/error.hpp"
#include "mgadn/evaluation.hpp"
#include "mgadn/io.hpp"
#include "plot.hpp"

namespace mgadn::cli {

using nlohmann::json;

void RunConfig::validate() const {
  if (data.empty()) throw ConfigError("no training data given");
  if (no_vae_head && no_pred_head) throw ConfigError("no_vae_head and no_pred_head cannot both be set");
  if (window < 1) throw ConfigError("window must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (alt_period < 1) throw ConfigError("alternating period must be positive");
  combination().validate();
  const double total = splits.train + splits.val + splits.test;
  if (splits.train <= 0.0 || splits.val <= 0.0 || splits.test < 0.0 || std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
}

ModelConfig RunConfig::model_config(std::size_t n_sensors) const {
  ModelConfig m;
  m.n_sensors = n_sensors;
  m.window = window;
  m.top_k = top_k;
  m.embed_dim = embed_dim;
  m.latent = latent;
  m.use_shared = !no_shared_layer;
  m.use_pred = !no_pred_head;
  m.use_recon = !no_vae_head;
  return m;
}

CombinationMode RunConfig::combination() const {
  if (no_mgda) return CombinationMode::alternating(alt_period);
  switch (combination_kind_from_string(mode)) {
    case CombinationMode::Kind::mgda_ub:
      return CombinationMode::mgda_ub();
    case CombinationMode::Kind::fixed:
      return CombinationMode::fixed(c_pred, c_recon);
    case CombinationMode::Kind::alternating:
      return CombinationMode::alternating(alt_period);
  }
  throw ConfigError("unknown combination mode");
}

std::string RunConfig::to_json() const {
  json j = {
      {"data", data.generic_string()},
      {"label_column", label_column ? json(*label_column) : json(nullptr)},
      {"window", window},
      {"top_k", top_k},
      {"embed_dim", embed_dim},
      {"latent", latent},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"lr", lr},
      {"seed", seed},
      {"mode", to_string(combination().kind)},
      {"c_pred", c_pred},
      {"c_recon", c_recon},
      {"alt_period", alt_period},
      {"no_vae_head", no_vae_head},
      {"no_pred_head", no_pred_head},
      {"no_shared_layer", no_shared_layer},
      {"no_mgda", no_mgda},
      {"splits", {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}}},
  };
  return j.dump();
}

std::optional<std::string> resolve_label_column(const fs::path& csv, const std::optional<std::string>& requested,
                                                const std::optional<std::string>& fallback) {
  const auto header = csv_header(csv);
  auto has = [&](const std::string& name) { return std::find(header.begin(), header.end(), name) != header.end(); };
  if (requested) {
    if (!has(*requested)) throw ConfigError("label column '" + *requested + "' not found in " + csv.string());
    return requested;
  }
  if (fallback && has(*fallback)) return fallback;
  return std::nullopt;
}

void cmd_synth(const SynthCommand& cmd, std::ostream& out) {
  if (cmd.out.empty()) throw ConfigError("no output path given");
  const auto ds = synth_generate(cmd.options);
  write_csv(cmd.out, ds, cmd.label_column);
  std::size_t labeled = 0;
  for (int l : *ds.labels) labeled += static_cast<std::size_t>(l);
  out << "wrote " << cmd.out.string() << ": sensors=" << ds.n_sensors() << " rows=" << ds.n_steps()
      << " anomalous_rows=" << labeled << '\n';
}

void cmd_train(const TrainCommand& cmd, std::ostream& out) {
  if (cmd.out.empty()) throw ConfigError("no checkpoint path given");
  RunConfig config = cmd.config;
  config.validate();
  config.label_column = resolve_label_column(config.data, config.label_column, std::string("label"));

  const auto ds = assign_splits(load_csv(config.data, config.label_column), config.splits);
  const auto [normalized, stats] = normalize(ds);
  const auto windows = make_windows(normalized, config.window);
  if (windows.train.empty()) throw ConfigError("train split yields no windows");

  Model model = Model::create(config.model_config(ds.n_sensors()), config.seed);

  std::ostringstream log_buffer;
  TrainOptions opts;
  opts.epochs = config.epochs;
  opts.batch_size = config.batch_size;
  opts.adam.lr = config.lr;
  opts.mode = config.combination();
  opts.seed = config.seed;
  opts.log = cmd.log ? static_cast<std::ostream*>(&log_buffer) : &out;
  const auto history = train(model, windows.train, opts);
  if (cmd.log) atomic_write(*cmd.log, log_buffer.str());

  Checkpoint ckpt;
  ckpt.model = model.config();
  ckpt.params = model.params();
  ckpt.normalization = stats;
  ckpt.sensor_names = ds.sensor_names;
  ckpt.run_config_json = config.to_json();
  save_checkpoint(cmd.out, ckpt);

  const auto& last = history.back();
  out << "saved " << cmd.out.string() << ": epochs=" << history.size() << " l_pred=" << last.losses.l_pred
      << " l_recon=" << last.losses.l_recon << '\n';
}

namespace {

struct LoadedCheckpoint {
  Checkpoint ckpt;
  SplitRatios splits;
  std::optional<std::string> label_column;
};

LoadedCheckpoint load_run(const fs::path& path) {
  LoadedCheckpoint out{load_checkpoint(path), {}, std::nullopt};
  const auto echo = json::parse(out.ckpt.run_config_json);
  if (echo.contains("splits")) {
    const auto& s = echo.at("splits");
    out.splits = {s.at("train").get<double>(), s.at("val").get<double>(), s.at("test").get<double>()};
  }
  if (echo.contains("label_column") && echo.at("label_column").is_string()) {
    out.label_column = echo.at("label_column").get<std::string>();
  }
  return out;
}

std::string matrix_csv(const Tensor& m, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
  s += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) s += (c ? "," : "") + format_number(m.at(r, c));
    s += '\n';
  }
  return s;
}

}  // namespace

void cmd_eval(const EvalCommand& cmd, std::ostream& out) {
  if (cmd.out.empty()) throw ConfigError("no score output path given");
  if (cmd.split == Split::train) throw ConfigError("evaluation split must be val or test");
  const auto run = load_run(cmd.checkpoint);
  const auto label = resolve_label_column(cmd.data, cmd.label_column, run.label_column);

  auto ds = load_csv(cmd.data, label);
  if (ds.sensor_names != run.ckpt.sensor_names) {
    throw ConfigError("sensor names in " + cmd.data.string() + " do not match the checkpoint");
  }
  ds = assign_splits(std::move(ds), run.splits);
  const auto normalized = apply_normalization(ds, run.ckpt.normalization);
  const Model model(run.ckpt.model, run.ckpt.params);

  const auto ev = evaluate(model, normalized, cmd.split);
  atomic_write(cmd.out, score_csv(ev.records, ev.threshold, ds.sensor_names, cmd.per_sensor));

  std::size_t alarms = 0;
  for (int v : ev.verdicts) alarms += static_cast<std::size_t>(v);
  out << "split=" << split_name(cmd.split) << " scored=" << ev.A.size() << " threshold=" << ev.threshold
      << " alarms=" << alarms << '\n';
  if (ev.metrics) {
    const auto& m = *ev.metrics;
    out << "precision=" << m.precision << " recall=" << m.recall << " f1=" << m.f1 << " tp=" << m.tp
        << " fp=" << m.fp << " fn=" << m.fn << '\n';
  } else {
    out << "notice: no labels available; metrics skipped\n";
  }
}

void cmd_export_graph(const ExportGraphCommand& cmd, std::ostream& out) {
  if (cmd.adjacency_out.empty() || cmd.similarity_out.empty()) throw ConfigError("output paths are required");
  const auto ckpt = load_checkpoint(cmd.checkpoint);
  if (!ckpt.model.use_pred) throw ConfigError("checkpoint has no forecast head, so there is no learned graph");
  const Model model(ckpt.model, ckpt.params);
  const auto mask = model.structure();
  atomic_write(cmd.adjacency_out, matrix_csv(mask.adjacency, ckpt.sensor_names));
  atomic_write(cmd.similarity_out, matrix_csv(mask.similarity, ckpt.sensor_names));
  out << "wrote " << cmd.adjacency_out.string() << " and " << cmd.similarity_out.string() << " (k=" << mask.k
      << ")\n";
}

void cmd_plot(const PlotCommand& cmd, std::ostream& out) {
  if (cmd.out.empty()) throw ConfigError("no plot output path given");
  const auto table = parse_score_csv(read_file(cmd.scores));
  if (table.t.empty()) throw ParseError("score file " + cmd.scores.string() + " has no rows");
  atomic_write(cmd.out, render_score_svg(table));
  out << "wrote " << cmd.out.string() << ": rows=" << table.t.size() << '\n';
}

}  // namespace mgadn::cli
