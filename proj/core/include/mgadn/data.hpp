#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgadn/tensor.hpp"

namespace mgadn {

enum class Split : std::uint8_t { train, val, test };

std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

// Chronological split fractions; must be positive and sum to 1.
struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// T x N multivariate series. Rows are timestamps in chronological order.
struct TimeSeriesDataset {
  std::vector<std::string> sensor_names;
  Tensor values;                          // T x N
  std::optional<std::vector<int>> labels;  // length T, entries in {0, 1}
  std::vector<Split> split;                // length T, non-decreasing

  std::size_t n_sensors() const { return values.cols(); }
  std::size_t n_steps() const { return values.rows(); }
  // [begin, end) row range of a split; begin == end when absent.
  std::pair<std::size_t, std::size_t> split_range(Split s) const;
  void validate() const;
};

// Per-sensor min/max over the train split.
struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;
};

// One sliding window: rows [target_time - d, target_time - 1] of the series.
struct Window {
  Tensor x;       // d x N, row r is timestamp target_time - d + r
  Tensor target;  // 1 x N, the row at target_time
  std::size_t target_time;
};

struct WindowBatch {
  std::vector<Window> windows;
  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
};

struct SplitWindows {
  WindowBatch train;
  WindowBatch val;
  WindowBatch test;
  const WindowBatch& of(Split s) const;
};

// Reads a CSV with a header of sensor names. When `label_column` is given,
// that column becomes the binary label vector and is excluded from sensors.
// Every row starts in the train split; see assign_splits.
TimeSeriesDataset load_csv(const std::filesystem::path& path,
                           const std::optional<std::string>& label_column = std::nullopt);
TimeSeriesDataset parse_csv(const std::string& text,
                            const std::optional<std::string>& label_column = std::nullopt);
std::vector<std::string> csv_header(const std::filesystem::path& path);

// Labels are written as a final integer column named `label_column`.
std::string to_csv(const TimeSeriesDataset& ds, const std::string& label_column = "label");
void write_csv(const std::filesystem::path& path, const TimeSeriesDataset& ds,
               const std::string& label_column = "label");

TimeSeriesDataset assign_splits(TimeSeriesDataset ds, const SplitRatios& ratios);

NormalizationStats fit_normalization(const TimeSeriesDataset& ds);
TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds, const NormalizationStats& stats);
// (v - min) / (max - min) with train-split stats; constant sensors map to 0.
std::pair<TimeSeriesDataset, NormalizationStats> normalize(const TimeSeriesDataset& ds);

// Stride-1 windows per split; no window or target crosses a split boundary.
SplitWindows make_windows(const TimeSeriesDataset& ds, std::size_t d);
// Windows over rows [begin, end) with targets begin + d .. end - 1.
WindowBatch windows_in_range(const TimeSeriesDataset& ds, std::size_t begin, std::size_t end,
                             std::size_t d);

struct SynthOptions {
  std::size_t n_sensors = 8;
  std::size_t n_steps = 2000;
  double anomaly_rate = 0.05;
  std::uint64_t seed = 0;
  // Leading fraction of rows kept anomaly-free (the train and validation
  // portions under the default 60/20/20 split).
  double clean_fraction = 0.8;
  double period = 40.0;
  double noise_sigma = 0.05;
  double coupling = 0.4;
};

// Phase-shifted sinusoids with lag-1 coupling to the previous sensor plus
// Gaussian noise. Anomalies are level-shift segments of 5 to 20 rows on 1 to
// 3 sensors inside the non-clean tail; labels mark exactly the shifted rows.
TimeSeriesDataset synth_generate(const SynthOptions& options);

}  // namespace mgadn
