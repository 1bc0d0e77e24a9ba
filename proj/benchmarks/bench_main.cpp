#include <benchmark/benchmark.h>

#include <numeric>

#include "mgadn/evaluation.hpp"
#include "mgadn/mtl.hpp"
#include "mgadn/trainer.hpp"

using namespace mgadn;

namespace {

struct Setup {
  TimeSeriesDataset normalized;
  SplitWindows windows;
  ModelConfig config;
};

Setup make_setup(std::size_t n_sensors) {
  auto ds = assign_splits(synth_generate({.n_sensors = n_sensors, .n_steps = 2000, .seed = 1}), {});
  auto norm = normalize(ds).first;
  auto windows = make_windows(norm, 5);
  return {std::move(norm), std::move(windows), {.n_sensors = n_sensors, .window = 5, .top_k = std::min<std::size_t>(5, n_sensors - 1)}};
}

void BM_ForwardWindow(benchmark::State& state) {
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const Model model = Model::create(s.config, 1);
  const auto mask = model.structure();
  const Tensor eps = Tensor::zeros({1, s.config.latent_size()});
  for (auto _ : state) {
    Tape tape;
    const auto bound = model.bind(tape);
    auto fw = model.forward(tape, bound, &mask, s.windows.train.windows[0].x, &eps);
    benchmark::DoNotOptimize(fw.forecast->value());
  }
}
BENCHMARK(BM_ForwardWindow)->Arg(8)->Arg(32);

void BM_CombinedStep(benchmark::State& state) {
  const auto s = make_setup(8);
  Model model = Model::create(s.config, 1);
  Adam adam;
  Rng rng(1);
  std::vector<const Window*> batch;
  for (std::size_t i = 0; i < 32; ++i) batch.push_back(&s.windows.train.windows[i]);
  const auto kind = static_cast<CombinationMode::Kind>(state.range(0));
  CombinationMode mode;
  mode.kind = kind;
  for (auto _ : state) benchmark::DoNotOptimize(combined_step(model, batch, mode, adam, rng, 0));
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_CombinedStep)
    ->Arg(static_cast<int>(CombinationMode::Kind::mgda_ub))
    ->Arg(static_cast<int>(CombinationMode::Kind::fixed))
    ->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto s = make_setup(8);
  Model model = Model::create(s.config, 1);
  for (auto _ : state) train(model, s.windows.train, {.epochs = 1, .seed = 1});
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.windows.train.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto s = make_setup(8);
  const Model model = Model::create(s.config, 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(model, s.normalized));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

void BM_Scoring(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 8;
  Rng rng(2);
  std::vector<double> a(T * n), b(T * n);
  for (auto& v : a) v = rng.uniform();
  for (auto& v : b) v = rng.uniform();
  std::vector<std::size_t> times(T);
  std::iota(times.begin(), times.end(), 0);
  const auto errs = compute_errors(times, Tensor::matrix(T, n, a), Tensor::matrix(T, n, b), Tensor::zeros({T, n}));
  for (auto _ : state) {
    const auto st = fit_robust_stats(errs);
    const auto A = aggregate(robust_normalize(errs, st));
    benchmark::DoNotOptimize(classify(A, calibrate_threshold(A)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * T));
}
BENCHMARK(BM_Scoring)->Arg(400)->Arg(4000);

void BM_LearnStructure(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Model model = Model::create({.n_sensors = n, .top_k = 5}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.structure());
}
BENCHMARK(BM_LearnStructure)->Arg(8)->Arg(127);

}  // namespace

BENCHMARK_MAIN();
