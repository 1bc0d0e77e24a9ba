#include "mgadn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mgadn/error.hpp"
#include "mgadn/io.hpp"
#include "mgadn/rng.hpp"

namespace mgadn {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::pair<std::size_t, std::size_t> TimeSeriesDataset::split_range(Split s) const {
  auto lo = std::find(split.begin(), split.end(), s);
  if (lo == split.end()) return {split.size(), split.size()};
  auto hi = std::find_if(lo, split.end(), [s](Split x) { return x != s; });
  return {static_cast<std::size_t>(lo - split.begin()), static_cast<std::size_t>(hi - split.begin())};
}

void TimeSeriesDataset::validate() const {
  if (values.rank() != 2) throw ShapeError("dataset values must be a T x N matrix");
  if (n_sensors() < 2) throw ParseError("dataset needs at least 2 sensors, got " + std::to_string(n_sensors()));
  if (sensor_names.size() != n_sensors()) throw ShapeError("sensor name count does not match columns");
  if (split.size() != n_steps()) throw ShapeError("split markers do not match row count");
  if (!std::is_sorted(split.begin(), split.end())) {
    throw ConfigError("splits must be chronological (train, then val, then test)");
  }
  if (labels) {
    if (labels->size() != n_steps()) throw ShapeError("label count does not match row count");
    for (std::size_t t = 0; t < labels->size(); ++t) {
      if ((*labels)[t] != 0 && (*labels)[t] != 1) {
        throw ParseError("label at row " + std::to_string(t) + " is not 0 or 1");
      }
    }
  }
}

const WindowBatch& SplitWindows::of(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return train;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line_no, std::size_t col) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": cannot parse '" + field + "' as a number");
  }
  return v;
}

}  // namespace

TimeSeriesDataset parse_csv(const std::string& text, const std::optional<std::string>& label_column) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw ParseError("CSV has no header row");

  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw ParseError("label column '" + *label_column + "' not found in header");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  TimeSeriesDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) ds.sensor_names.push_back(header[c]);
  if (ds.sensor_names.size() < 2) {
    throw ParseError("need at least 2 sensor columns, found " + std::to_string(ds.sensor_names.size()));
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = parse_number(fields[c], line_no, c);
      if (c == label_idx) {
        if (v != 0.0 && v != 1.0) {
          throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                           ": label must be 0 or 1, got '" + fields[c] + "'");
        }
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("CSV has no data rows");

  ds.values = Tensor::matrix(rows, ds.sensor_names.size(), std::move(values));
  if (label_idx) ds.labels = std::move(labels);
  ds.split.assign(rows, Split::train);
  return ds;
}

TimeSeriesDataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), label_column);
}

std::vector<std::string> csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return split_fields(line);
  }
  return {};
}

std::string to_csv(const TimeSeriesDataset& ds, const std::string& label_column) {
  std::string out;
  for (std::size_t c = 0; c < ds.sensor_names.size(); ++c) {
    if (c) out += ',';
    out += ds.sensor_names[c];
  }
  if (ds.labels) out += ',' + label_column;
  out += '\n';
  const std::size_t n = ds.n_sensors();
  for (std::size_t t = 0; t < ds.n_steps(); ++t) {
    for (std::size_t c = 0; c < n; ++c) {
      if (c) out += ',';
      out += format_number(ds.values.at(t, c));
    }
    if (ds.labels) out += ',' + std::to_string((*ds.labels)[t]);
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const TimeSeriesDataset& ds, const std::string& label_column) {
  atomic_write(path, to_csv(ds, label_column));
}

// ---------------------------------------------------------------------------
// Splits and normalization

TimeSeriesDataset assign_splits(TimeSeriesDataset ds, const SplitRatios& r) {
  if (r.train <= 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative, train positive, and sum to 1");
  }
  const std::size_t T = ds.n_steps();
  const auto n_train = static_cast<std::size_t>(std::floor(r.train * static_cast<double>(T) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(r.val * static_cast<double>(T) + 1e-9));
  ds.split.assign(T, Split::test);
  for (std::size_t t = 0; t < T; ++t) {
    if (t < n_train) ds.split[t] = Split::train;
    else if (t < n_train + n_val) ds.split[t] = Split::val;
  }
  return ds;
}

NormalizationStats fit_normalization(const TimeSeriesDataset& ds) {
  auto [b, e] = ds.split_range(Split::train);
  if (b == e) throw ConfigError("normalization needs a nonempty train split");
  const std::size_t n = ds.n_sensors();
  NormalizationStats st{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t c = 0; c < n; ++c) {
    double lo = ds.values.at(b, c), hi = lo;
    for (std::size_t t = b; t < e; ++t) {
      lo = std::min(lo, ds.values.at(t, c));
      hi = std::max(hi, ds.values.at(t, c));
    }
    st.min[c] = lo;
    st.max[c] = hi;
  }
  return st;
}

TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds, const NormalizationStats& st) {
  const std::size_t n = ds.n_sensors();
  if (st.min.size() != n || st.max.size() != n) throw ShapeError("normalization stats do not match sensor count");
  std::vector<double> out(ds.values.numel());
  for (std::size_t t = 0; t < ds.n_steps(); ++t) {
    for (std::size_t c = 0; c < n; ++c) {
      const double range = st.max[c] - st.min[c];
      out[t * n + c] = range > 0.0 ? (ds.values.at(t, c) - st.min[c]) / range : 0.0;
    }
  }
  TimeSeriesDataset res = ds;
  res.values = Tensor::matrix(ds.n_steps(), n, std::move(out));
  return res;
}

std::pair<TimeSeriesDataset, NormalizationStats> normalize(const TimeSeriesDataset& ds) {
  auto st = fit_normalization(ds);
  return {apply_normalization(ds, st), st};
}

// ---------------------------------------------------------------------------
// Windows

WindowBatch windows_in_range(const TimeSeriesDataset& ds, std::size_t begin, std::size_t end, std::size_t d) {
  if (d == 0) throw ConfigError("window length must be positive");
  WindowBatch batch;
  if (end <= begin + d) return batch;
  batch.windows.reserve(end - begin - d);
  for (std::size_t t = begin + d; t < end; ++t) {
    batch.windows.push_back(Window{ds.values.row_slice(t - d, t), ds.values.row_slice(t, t + 1), t});
  }
  return batch;
}

SplitWindows make_windows(const TimeSeriesDataset& ds, std::size_t d) {
  if (d == 0) throw ConfigError("window length must be positive");
  SplitWindows out;
  for (Split s : {Split::train, Split::val, Split::test}) {
    auto [b, e] = ds.split_range(s);
    if (b == e) continue;
    if (e - b <= d) {
      throw ConfigError(std::string(split_name(s)) + " split has " + std::to_string(e - b) +
                        " rows; needs more than the window length " + std::to_string(d));
    }
    auto batch = windows_in_range(ds, b, e, d);
    switch (s) {
      case Split::train: out.train = std::move(batch); break;
      case Split::val: out.val = std::move(batch); break;
      case Split::test: out.test = std::move(batch); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

TimeSeriesDataset synth_generate(const SynthOptions& o) {
  if (o.n_sensors < 2) throw ConfigError("synthetic data needs at least 2 sensors");
  if (!(o.anomaly_rate > 0.0 && o.anomaly_rate < 0.5)) throw ConfigError("anomaly rate must lie in (0, 0.5)");
  if (!(o.clean_fraction >= 0.0 && o.clean_fraction < 1.0)) throw ConfigError("clean fraction must lie in [0, 1)");
  if (o.n_steps < 2) throw ConfigError("synthetic data needs at least 2 steps");

  constexpr std::int64_t kMinSegment = 5;
  constexpr std::int64_t kMaxSegment = 20;
  constexpr std::int64_t kMinGap = 10;
  constexpr double kAmplitude = 1.0;

  Rng rng(o.seed);
  const std::size_t N = o.n_sensors, T = o.n_steps;
  std::vector<double> phase(N);
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> v(T * N);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < N; ++i) {
      double x = kAmplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / o.period + phase[i]);
      if (i > 0 && t > 0) x += o.coupling * v[(t - 1) * N + (i - 1)];
      x += o.noise_sigma * rng.normal();
      v[t * N + i] = x;
    }
  }

  const auto region_begin = static_cast<std::int64_t>(std::ceil(o.clean_fraction * static_cast<double>(T)));
  const auto region_end = static_cast<std::int64_t>(T);
  const auto target = static_cast<std::int64_t>(std::llround(o.anomaly_rate * static_cast<double>(T)));
  std::vector<int> labels(T, 0);
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
  std::int64_t labeled = 0;
  int failures = 0;
  while (labeled < target) {
    std::int64_t len = rng.integer(kMinSegment, kMaxSegment);
    len = std::max(kMinSegment, std::min(len, target - labeled));
    if (region_end - region_begin < len) throw ConfigError("anomaly region too short for a segment");
    const std::int64_t start = rng.integer(region_begin, region_end - len);
    const bool clash = std::any_of(segments.begin(), segments.end(), [&](const auto& s) {
      return start < s.second + kMinGap && s.first < start + len + kMinGap;
    });
    if (clash) {
      if (++failures > 10000) {
        throw ConfigError("anomaly rate too high to place segments in the anomalous tail");
      }
      continue;
    }
    segments.emplace_back(start, start + len);
    labeled += len;

    std::vector<std::size_t> sensors(N);
    for (std::size_t i = 0; i < N; ++i) sensors[i] = i;
    std::shuffle(sensors.begin(), sensors.end(), rng.engine());
    const auto count = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(std::min<std::size_t>(3, N))));
    for (std::size_t k = 0; k < count; ++k) {
      const double magnitude = std::max(3.0 * o.noise_sigma, rng.uniform(0.5, 1.5) * kAmplitude);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      for (std::int64_t t = start; t < start + len; ++t) v[static_cast<std::size_t>(t) * N + sensors[k]] += sign * magnitude;
    }
    for (std::int64_t t = start; t < start + len; ++t) labels[static_cast<std::size_t>(t)] = 1;
  }

  TimeSeriesDataset ds;
  for (std::size_t i = 0; i < N; ++i) ds.sensor_names.push_back("s" + std::to_string(i));
  ds.values = Tensor::matrix(T, N, std::move(v));
  ds.labels = std::move(labels);
  ds.split.assign(T, Split::train);
  return ds;
}

}  // namespace mgadn
