#pragma once

#include <optional>
#include <vector>

#include "mgadn/data.hpp"
#include "mgadn/model.hpp"
#include "mgadn/scoring.hpp"

namespace mgadn {

// Head outputs aligned to the scored timestamps of one split. Timestamp t
// is forecast from rows [t-d, t-1] and reconstructed as the last row of the
// window [t-d+1, t], so every scored row is covered once by each head.
struct HeadOutputs {
  std::vector<std::size_t> times;
  Tensor forecast;  // T' x N, empty without the forecast head
  Tensor recon;     // T' x N, empty without the VAE head
  Tensor truth;     // T' x N
};

HeadOutputs run_heads(const Model& model, const TimeSeriesDataset& normalized, Split split);

struct Evaluation {
  RobustStats stats;
  double threshold = 0.0;
  std::vector<double> validation_scores;
  NormalizedScores scores;
  std::vector<double> A;
  std::vector<int> verdicts;
  std::vector<ScoreRecord> records;
  std::optional<Metrics> metrics;  // when the dataset has labels
};

// Fits robust statistics and the threshold on the validation split, then
// scores `target` (which may be the validation split itself).
Evaluation evaluate(const Model& model, const TimeSeriesDataset& normalized, Split target = Split::test);

}  // namespace mgadn
