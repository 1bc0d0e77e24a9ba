#include "mgadn/evaluation.hpp"

#include "mgadn/error.hpp"

namespace mgadn {

HeadOutputs run_heads(const Model& model, const TimeSeriesDataset& ds, Split split) {
  const std::size_t d = model.config().window;
  const std::size_t n = ds.n_sensors();
  if (n != model.config().n_sensors) throw ShapeError("dataset sensor count does not match the model");
  auto [b, e] = ds.split_range(split);
  if (e - b <= d) throw ConfigError(std::string(split_name(split)) + " split is too short to score");

  // Input windows start at rows b .. e-d; window s covers [s, s+d-1].
  std::vector<Tensor> inputs;
  for (std::size_t s = b; s + d <= e; ++s) inputs.push_back(ds.values.row_slice(s, s + d));
  const auto preds = model.infer(inputs);

  HeadOutputs out;
  const std::size_t T = e - b - d;
  std::vector<double> fc, rc, truth;
  for (std::size_t t = b + d; t < e; ++t) {
    out.times.push_back(t);
    auto row = ds.values.row_slice(t, t + 1);
    truth.insert(truth.end(), row.data().begin(), row.data().end());
    const auto& fp = preds[t - d - b];
    const auto& rp = preds[t - d + 1 - b];
    if (!fp.forecast.empty()) fc.insert(fc.end(), fp.forecast.data().begin(), fp.forecast.data().end());
    if (!rp.reconstruction.empty()) {
      auto last = rp.reconstruction.data().subspan((d - 1) * n, n);
      rc.insert(rc.end(), last.begin(), last.end());
    }
  }
  out.truth = Tensor::matrix(T, n, std::move(truth));
  if (!fc.empty()) out.forecast = Tensor::matrix(T, n, std::move(fc));
  if (!rc.empty()) out.recon = Tensor::matrix(T, n, std::move(rc));
  return out;
}

namespace {

ErrSeries errors_for(const Model& model, const TimeSeriesDataset& ds, Split split) {
  auto h = run_heads(model, ds, split);
  return compute_errors(std::move(h.times), h.forecast, h.recon, h.truth);
}

}  // namespace

Evaluation evaluate(const Model& model, const TimeSeriesDataset& ds, Split target) {
  Evaluation ev;
  const auto val_errs = errors_for(model, ds, Split::val);
  ev.stats = fit_robust_stats(val_errs);
  ev.validation_scores = aggregate(robust_normalize(val_errs, ev.stats));
  ev.threshold = calibrate_threshold(ev.validation_scores);

  const auto errs = target == Split::val ? val_errs : errors_for(model, ds, target);
  ev.scores = robust_normalize(errs, ev.stats);
  ev.A = aggregate(ev.scores);
  ev.verdicts = classify(ev.A, ev.threshold);
  ev.records = make_records(ev.scores, ev.A, ev.verdicts, ds.labels);
  if (ds.labels) {
    std::vector<int> labels;
    for (auto t : ev.scores.times) labels.push_back((*ds.labels)[t]);
    ev.metrics = metrics(ev.verdicts, labels);
  }
  return ev;
}

}  // namespace mgadn
