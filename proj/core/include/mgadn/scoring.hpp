#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgadn/tensor.hpp"

namespace mgadn {

// Absolute per-sensor errors, one row per scored timestamp. A head that is
// disabled leaves its matrix empty.
struct ErrSeries {
  std::vector<std::size_t> times;
  Tensor pred;   // T' x N
  Tensor recon;  // T' x N

  std::size_t size() const { return times.size(); }
};

// Median and inter-quartile range per sensor and head.
struct RobustStats {
  std::vector<double> pred_median;
  std::vector<double> pred_iqr;
  std::vector<double> recon_median;
  std::vector<double> recon_iqr;
};

struct NormalizedScores {
  std::vector<std::size_t> times;
  Tensor pred;
  Tensor recon;
};

struct ScoreRecord {
  std::size_t t = 0;
  std::vector<double> a_pred;
  std::vector<double> a_recon;
  double A = 0.0;
  int verdict = 0;
  std::optional<int> label;
};

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline constexpr double kIqrFloor = 1e-6;

// |truth - prediction| and |truth - reconstruction| elementwise. Either of
// predictions/reconstructions may be empty (head disabled).
ErrSeries compute_errors(std::vector<std::size_t> times, const Tensor& predictions, const Tensor& reconstructions,
                         const Tensor& truth);

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

RobustStats fit_robust_stats(const ErrSeries& validation);

// (err - median) / max(IQR, 1e-6) per sensor and head.
NormalizedScores robust_normalize(const ErrSeries& errs, const RobustStats& stats);

// A(t): maximum over both heads and all sensors.
std::vector<double> aggregate(const NormalizedScores& scores);
double aggregate_row(std::span<const double> a_pred, std::span<const double> a_recon);

// Maximum of the validation A(t) series.
double calibrate_threshold(std::span<const double> validation_scores);
// 1 where A(t) > threshold (strictly).
std::vector<int> classify(std::span<const double> scores, double threshold);

double f1_score(double precision, double recall);
Metrics metrics(std::span<const int> verdicts, std::span<const int> labels);

std::vector<ScoreRecord> make_records(const NormalizedScores& scores, std::span<const double> A,
                                      std::span<const int> verdicts, const std::optional<std::vector<int>>& labels);

// Score CSV: "# threshold=<value>" comment line, then a header
// "t,A,verdict[,label][,pred_<sensor>...,recon_<sensor>...]".
std::string score_csv(const std::vector<ScoreRecord>& records, double threshold,
                      const std::vector<std::string>& sensor_names, bool per_sensor);

struct ScoreTable {
  double threshold = 0.0;
  std::vector<std::size_t> t;
  std::vector<double> A;
  std::vector<int> verdict;
  std::vector<int> label;  // empty when the file has no label column
};

ScoreTable parse_score_csv(const std::string& text);

}  // namespace mgadn
