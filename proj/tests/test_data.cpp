#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "mgadn/data.hpp"
#include "mgadn/error.hpp"
#include "mgadn/rng.hpp"
#include "support/tempdir.hpp"

using namespace mgadn;
using mgadn::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

TimeSeriesDataset tiny(std::size_t T, std::size_t N) {
  TimeSeriesDataset ds;
  for (std::size_t i = 0; i < N; ++i) ds.sensor_names.push_back("c" + std::to_string(i));
  std::vector<double> v(T * N);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  ds.values = Tensor::matrix(T, N, std::move(v));
  ds.split.assign(T, Split::train);
  return ds;
}

TEST(LoadCsv, ShapePassthrough) {
  TempDir dir;
  std::string text = "a,b,c\n";
  for (int t = 0; t < 10; ++t) text += std::to_string(t) + ",1.5,-2e-3\n";
  write_text(dir / "x.csv", text);
  const auto ds = load_csv(dir / "x.csv");
  EXPECT_EQ(ds.n_sensors(), 3u);
  EXPECT_EQ(ds.n_steps(), 10u);
  EXPECT_FALSE(ds.labels.has_value());
  EXPECT_DOUBLE_EQ(ds.values.at(9, 0), 9.0);
  EXPECT_DOUBLE_EQ(ds.values.at(3, 2), -2e-3);
}

TEST(LoadCsv, LabelColumnIsExcludedFromSensors) {
  const auto ds = parse_csv("a,label,b\n1,0,2\n3,1,4\n", std::string("label"));
  EXPECT_EQ(ds.sensor_names, (std::vector<std::string>{"a", "b"}));
  ASSERT_TRUE(ds.labels.has_value());
  EXPECT_EQ(*ds.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(ds.values, Tensor::matrix({{1, 2}, {3, 4}}));
}

TEST(LoadCsv, WadiShapedHeaderGives127Sensors) {
  std::string header, row;
  for (int i = 0; i < 127; ++i) {
    header += (i ? "," : "") + std::string("WADI_") + std::to_string(i);
    row += (i ? "," : "") + std::to_string(i * 0.5);
  }
  const auto ds = parse_csv(header + "\n" + row + "\n" + row + "\n");
  EXPECT_EQ(ds.n_sensors(), 127u);
}

TEST(LoadCsv, ParseErrorsCarryLineAndColumn) {
  try {
    parse_csv("a,b\n1,2\n3,oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3, column 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ParseError);
  EXPECT_THROW(parse_csv("a,label\n1,0\n", std::string("label")), ParseError);  // one sensor
  EXPECT_THROW(parse_csv("a,b,label\n1,2,2\n", std::string("label")), ParseError);
  EXPECT_THROW(parse_csv("a,b\n1,2\n", std::string("missing")), ParseError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), ParseError);
}

TEST(CsvRoundTrip, ValuesSurviveToWithinTolerance) {
  TempDir dir;
  auto ds = synth_generate({.n_sensors = 4, .n_steps = 300, .anomaly_rate = 0.05, .seed = 5});
  write_csv(dir / "rt.csv", ds);
  const auto back = load_csv(dir / "rt.csv", std::string("label"));
  EXPECT_EQ(back.sensor_names, ds.sensor_names);
  EXPECT_EQ(*back.labels, *ds.labels);
  EXPECT_LE(max_abs_diff(back.values, ds.values), 1e-12);
}

TEST(Splits, ChronologicalSixtyTwentyTwenty) {
  auto ds = assign_splits(tiny(100, 2), {});
  EXPECT_EQ(ds.split_range(Split::train), (std::pair<std::size_t, std::size_t>{0, 60}));
  EXPECT_EQ(ds.split_range(Split::val), (std::pair<std::size_t, std::size_t>{60, 80}));
  EXPECT_EQ(ds.split_range(Split::test), (std::pair<std::size_t, std::size_t>{80, 100}));
  EXPECT_THROW(assign_splits(tiny(10, 2), {0.5, 0.2, 0.2}), ConfigError);
}

TEST(Normalize, TrainEndpointsMapToZeroAndOne) {
  TimeSeriesDataset ds;
  ds.sensor_names = {"x", "y"};
  ds.values = Tensor::matrix({{0, 3}, {10, 3}, {12, 3}});
  ds.split = {Split::train, Split::train, Split::test};
  const auto [n, st] = normalize(ds);
  EXPECT_DOUBLE_EQ(n.values.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(n.values.at(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.values.at(2, 0), 1.2);  // no clamping outside train
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(n.values.at(t, 1), 0.0);  // constant sensor
  EXPECT_EQ(st.min, (std::vector<double>{0, 3}));
  EXPECT_EQ(st.max, (std::vector<double>{10, 3}));
}

TEST(Normalize, TrainSplitLandsInUnitInterval) {
  auto ds = assign_splits(synth_generate({.n_sensors = 5, .n_steps = 500, .seed = 3}), {});
  const auto [n, st] = normalize(ds);
  auto [b, e] = n.split_range(Split::train);
  for (std::size_t t = b; t < e; ++t)
    for (std::size_t c = 0; c < n.n_sensors(); ++c) {
      EXPECT_GE(n.values.at(t, c), 0.0);
      EXPECT_LE(n.values.at(t, c), 1.0);
    }
  for (std::size_t c = 0; c < st.min.size(); ++c) EXPECT_GE(st.max[c], st.min[c]);
}

TEST(Normalize, EmptyTrainSplitThrows) {
  auto ds = tiny(4, 2);
  ds.split.assign(4, Split::test);
  EXPECT_THROW(normalize(ds), ConfigError);
}

TEST(Windows, TenRowsWindowFiveGivesFiveTargets) {
  const auto w = make_windows(tiny(10, 2), 5);
  ASSERT_EQ(w.train.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(w.train.windows[k].target_time, 5 + k);
}

TEST(Windows, WindowHoldsThePrecedingRowsExactly) {
  const auto ds = tiny(10, 3);
  const auto w = make_windows(ds, 5);
  for (const auto& win : w.train.windows) {
    const std::size_t t = win.target_time;
    EXPECT_EQ(win.x, ds.values.row_slice(t - 5, t));
    EXPECT_EQ(win.target, ds.values.row_slice(t, t + 1));
  }
}

TEST(Windows, CountsPerSplitAndNoBoundaryCrossing) {
  const auto ds = assign_splits(tiny(100, 2), {});
  const auto w = make_windows(ds, 5);
  EXPECT_EQ(w.train.size(), 55u);
  EXPECT_EQ(w.val.size(), 15u);
  EXPECT_EQ(w.test.size(), 15u);
  for (Split s : {Split::train, Split::val, Split::test}) {
    auto [b, e] = ds.split_range(s);
    for (const auto& win : w.of(s).windows) {
      EXPECT_GE(win.target_time, b + 5);
      EXPECT_LT(win.target_time, e);
    }
  }
}

TEST(Windows, SplitTooShortThrows) {
  auto ds = tiny(12, 2);
  ds.split = std::vector<Split>(12, Split::train);
  for (std::size_t t = 8; t < 12; ++t) ds.split[t] = Split::test;
  EXPECT_THROW(make_windows(ds, 5), ConfigError);
}

TEST(Synth, SameSeedIsIdentical) {
  const SynthOptions o{.n_sensors = 6, .n_steps = 800, .anomaly_rate = 0.05, .seed = 17};
  const auto a = synth_generate(o);
  const auto b = synth_generate(o);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(*a.labels, *b.labels);
  EXPECT_EQ(to_csv(a), to_csv(b));
}

TEST(Synth, DefaultRateGivesEightyToOneTwentyLabeledRows) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = synth_generate({.n_sensors = 8, .n_steps = 2000, .anomaly_rate = 0.05, .seed = seed});
    int count = 0;
    for (int l : *ds.labels) count += l;
    EXPECT_GE(count, 80) << "seed " << seed;
    EXPECT_LE(count, 120) << "seed " << seed;
  }
}

TEST(Synth, InvalidRatesRejected) {
  EXPECT_THROW(synth_generate({.anomaly_rate = 0.0}), ConfigError);
  EXPECT_THROW(synth_generate({.anomaly_rate = 0.5}), ConfigError);
  EXPECT_THROW(synth_generate({.n_sensors = 1}), ConfigError);
}

// Clean signal rebuilt independently: same draws in the same order, no shifts.
Tensor clean_signal(const SynthOptions& o) {
  Rng rng(o.seed);
  std::vector<double> phase(o.n_sensors);
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> v(o.n_steps * o.n_sensors);
  for (std::size_t t = 0; t < o.n_steps; ++t)
    for (std::size_t i = 0; i < o.n_sensors; ++i) {
      double x = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / o.period + phase[i]);
      if (i > 0 && t > 0) x += o.coupling * v[(t - 1) * o.n_sensors + i - 1];
      v[t * o.n_sensors + i] = x + o.noise_sigma * rng.normal();
    }
  return Tensor::matrix(o.n_steps, o.n_sensors, std::move(v));
}

TEST(Synth, LabelsMarkExactlyTheShiftedRows) {
  const SynthOptions o{.n_sensors = 8, .n_steps = 2000, .anomaly_rate = 0.05, .seed = 21};
  const auto ds = synth_generate(o);
  const auto clean = clean_signal(o);
  const auto w = make_windows(ds, 5);
  for (const auto& win : w.train.windows) {
    const std::size_t t = win.target_time;
    bool shifted = false;
    for (std::size_t i = 0; i < o.n_sensors; ++i) shifted |= std::abs(ds.values.at(t, i) - clean.at(t, i)) > 1e-12;
    EXPECT_EQ(shifted ? 1 : 0, (*ds.labels)[t]) << "t=" << t;
  }
}

TEST(Synth, AnomaliesStayInTheTail) {
  const auto ds = synth_generate({.n_steps = 2000, .seed = 4});
  for (std::size_t t = 0; t < 1600; ++t) EXPECT_EQ((*ds.labels)[t], 0);
}

TEST(Synth, SegmentsAreFiveToTwentyRowsLong) {
  const auto ds = synth_generate({.n_steps = 2000, .seed = 9});
  const auto& l = *ds.labels;
  std::size_t t = 0;
  while (t < l.size()) {
    if (!l[t]) {
      ++t;
      continue;
    }
    std::size_t e = t;
    while (e < l.size() && l[e]) ++e;
    EXPECT_GE(e - t, 5u);
    EXPECT_LE(e - t, 20u);
    t = e;
  }
}

}  // namespace
