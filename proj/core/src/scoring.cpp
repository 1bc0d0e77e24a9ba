#include "mgadn/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgadn/error.hpp"
#include "mgadn/io.hpp"

namespace mgadn {
namespace {

Tensor abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("compute_errors: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(a[i] - b[i]);
  return Tensor(a.shape(), std::move(out));
}

void column_stats(const Tensor& errs, std::vector<double>& median, std::vector<double>& iqr) {
  const std::size_t n = errs.cols();
  median.assign(n, 0.0);
  iqr.assign(n, 0.0);
  std::vector<double> col(errs.rows());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < errs.rows(); ++r) col[r] = errs.at(r, c);
    median[c] = quantile(col, 0.5);
    iqr[c] = quantile(col, 0.75) - quantile(col, 0.25);
  }
}

Tensor normalize_columns(const Tensor& errs, const std::vector<double>& median, const std::vector<double>& iqr) {
  if (errs.empty()) return Tensor();
  const std::size_t n = errs.cols();
  if (median.size() != n || iqr.size() != n) throw ShapeError("robust_normalize: stats do not match sensor count");
  std::vector<double> out(errs.numel());
  for (std::size_t r = 0; r < errs.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = (errs.at(r, c) - median[c]) / std::max(iqr[c], kIqrFloor);
  return Tensor(errs.shape(), std::move(out));
}

}  // namespace

ErrSeries compute_errors(std::vector<std::size_t> times, const Tensor& predictions, const Tensor& reconstructions,
                         const Tensor& truth) {
  if (truth.rows() != times.size()) throw ShapeError("compute_errors: truth rows do not match timestamps");
  ErrSeries e;
  e.times = std::move(times);
  if (!predictions.empty()) e.pred = abs_diff(truth, predictions);
  if (!reconstructions.empty()) e.recon = abs_diff(truth, reconstructions);
  if (e.pred.empty() && e.recon.empty()) throw ConfigError("compute_errors: no head outputs");
  return e;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of empty series");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

RobustStats fit_robust_stats(const ErrSeries& v) {
  if (v.size() == 0) throw ConfigError("robust statistics need validation errors");
  RobustStats s;
  if (!v.pred.empty()) column_stats(v.pred, s.pred_median, s.pred_iqr);
  if (!v.recon.empty()) column_stats(v.recon, s.recon_median, s.recon_iqr);
  return s;
}

NormalizedScores robust_normalize(const ErrSeries& errs, const RobustStats& stats) {
  return {errs.times, normalize_columns(errs.pred, stats.pred_median, stats.pred_iqr),
          normalize_columns(errs.recon, stats.recon_median, stats.recon_iqr)};
}

double aggregate_row(std::span<const double> a_pred, std::span<const double> a_recon) {
  if (a_pred.empty() && a_recon.empty()) throw ConfigError("aggregate: no scores");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a_pred) m = std::max(m, v);
  for (double v : a_recon) m = std::max(m, v);
  return m;
}

std::vector<double> aggregate(const NormalizedScores& s) {
  const std::size_t T = s.times.size();
  std::vector<double> out(T);
  const std::size_t np = s.pred.empty() ? 0 : s.pred.cols();
  const std::size_t nr = s.recon.empty() ? 0 : s.recon.cols();
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> p = np ? s.pred.data().subspan(t * np, np) : std::span<const double>{};
    std::span<const double> r = nr ? s.recon.data().subspan(t * nr, nr) : std::span<const double>{};
    out[t] = aggregate_row(p, r);
  }
  return out;
}

double calibrate_threshold(std::span<const double> validation_scores) {
  if (validation_scores.empty()) throw ConfigError("threshold calibration needs validation scores");
  return *std::max_element(validation_scores.begin(), validation_scores.end());
}

std::vector<int> classify(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

Metrics metrics(std::span<const int> verdicts, std::span<const int> labels) {
  if (verdicts.size() != labels.size()) throw ShapeError("metrics: verdict and label counts differ");
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ConfigError("metrics: labels must be binary");
    const bool p = verdicts[i] != 0, y = labels[i] != 0;
    if (p && y) ++m.tp;
    else if (p) ++m.fp;
    else if (y) ++m.fn;
    else ++m.tn;
  }
  m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

std::vector<ScoreRecord> make_records(const NormalizedScores& s, std::span<const double> A,
                                      std::span<const int> verdicts, const std::optional<std::vector<int>>& labels) {
  const std::size_t T = s.times.size();
  if (A.size() != T || verdicts.size() != T) throw ShapeError("make_records: length mismatch");
  std::vector<ScoreRecord> out(T);
  for (std::size_t i = 0; i < T; ++i) {
    auto& r = out[i];
    r.t = s.times[i];
    if (!s.pred.empty()) {
      auto row = s.pred.data().subspan(i * s.pred.cols(), s.pred.cols());
      r.a_pred.assign(row.begin(), row.end());
    }
    if (!s.recon.empty()) {
      auto row = s.recon.data().subspan(i * s.recon.cols(), s.recon.cols());
      r.a_recon.assign(row.begin(), row.end());
    }
    r.A = A[i];
    r.verdict = verdicts[i];
    if (labels) r.label = (*labels)[r.t];
  }
  return out;
}

std::string score_csv(const std::vector<ScoreRecord>& records, double threshold,
                      const std::vector<std::string>& sensor_names, bool per_sensor) {
  const bool has_label = !records.empty() && records.front().label.has_value();
  const bool has_pred = !records.empty() && !records.front().a_pred.empty();
  const bool has_recon = !records.empty() && !records.front().a_recon.empty();
  std::string out = "# threshold=" + format_number(threshold) + "\n";
  out += "t,A,verdict";
  if (has_label) out += ",label";
  if (per_sensor) {
    if (has_pred)
      for (const auto& n : sensor_names) out += ",pred_" + n;
    if (has_recon)
      for (const auto& n : sensor_names) out += ",recon_" + n;
  }
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.t) + ',' + format_number(r.A) + ',' + std::to_string(r.verdict);
    if (has_label) out += ',' + std::to_string(r.label.value_or(0));
    if (per_sensor) {
      for (double v : r.a_pred) out += ',' + format_number(v);
      for (double v : r.a_recon) out += ',' + format_number(v);
    }
    out += '\n';
  }
  return out;
}

ScoreTable parse_score_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  ScoreTable table;
  bool have_threshold = false;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw ParseError("score CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# threshold=", 0) == 0) {
      table.threshold = number(line.substr(12));
      have_threshold = true;
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (header.empty()) {
      header = fields;
      if (header.size() < 3 || header[0] != "t" || header[1] != "A" || header[2] != "verdict") {
        throw ParseError("score CSV header must start with t,A,verdict");
      }
      continue;
    }
    if (fields.size() != header.size()) throw ParseError("score CSV line " + std::to_string(line_no) + ": field count");
    table.t.push_back(static_cast<std::size_t>(number(fields[0])));
    table.A.push_back(number(fields[1]));
    table.verdict.push_back(static_cast<int>(number(fields[2])));
    if (header.size() > 3 && header[3] == "label") table.label.push_back(static_cast<int>(number(fields[3])));
  }
  if (!have_threshold) throw ParseError("score CSV lacks the '# threshold=' line");
  if (header.empty()) throw ParseError("score CSV lacks a header");
  if (table.t.empty()) throw ParseError("score CSV has no rows");
  return table;
}

}  // namespace mgadn
