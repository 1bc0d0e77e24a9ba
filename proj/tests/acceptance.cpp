// Acceptance harness: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "commands.hpp"
#include "mgadn/checkpoint.hpp"
#include "mgadn/evaluation.hpp"
#include "mgadn/forecast_head.hpp"
#include "mgadn/io.hpp"
#include "mgadn/mtl.hpp"
#include "mgadn/scoring.hpp"
#include "mgadn/shared_layer.hpp"
#include "mgadn/vae_head.hpp"
#include "support/gradcheck.hpp"

using namespace mgadn;
using namespace mgadn::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------- 1

constexpr std::size_t kN = 4, kD = 5, kW = 3, kL = 2;

struct Worst {
  double err = 0.0;
  std::string where;
  std::size_t checked = 0;
  void add(const std::string& what, const GradCheck& g) {
    checked += g.checked;
    if (g.max_rel_error > err) err = g.max_rel_error, where = what + " " + g.worst;
  }
};

ParamStore subset(const ParamStore& full, const std::string& prefix) {
  ParamStore s;
  for (const auto& n : full.names())
    if (n.rfind(prefix, 0) == 0) s.add(full.partition_of(n), n, full.get(n));
  return s;
}

// Biases start at zero, which can place a ReLU exactly on its kink when its
// input vanishes. Gradients are checked at a generic point instead.
ParamStore with_random_biases(ParamStore store, Rng& rng) {
  for (const auto& n : store.names())
    if (n.size() > 2 && n.compare(n.size() - 2, 2, ".b") == 0)
      store.set(n, random_tensor(rng, store.get(n).rows(), store.get(n).cols(), -0.1, 0.1));
  return store;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  Worst worst;
  const ModelConfig cfg{.n_sensors = kN, .window = kD, .top_k = 2, .embed_dim = kW, .latent = kL};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const ParamStore full = with_random_biases(init_params(model_param_specs(cfg), seed), rng);
    const Tensor x = random_tensor(rng, kD, kN, 0.0, 1.0);
    const Tensor wz = random_tensor(rng, kD, kN);
    const Tensor wf = random_tensor(rng, 1, kN);

    const auto lstm = subset(full, "shared.lstm");
    worst.add("bilstm", check_param_gradients(
                            [&](Tape& t, const ParamStore& s) {
                              return project(bilstm_forward(t.constant(x), BiLstmParams::bind(t, s)), wz);
                            },
                            lstm));
    worst.add("bilstm-input", check_input_gradients(
                                  [&](Tape& t, const std::vector<Var>& v) {
                                    return project(bilstm_forward(v[0], BiLstmParams::bind(t, full)), wz);
                                  },
                                  {x}));
    const auto attn = subset(full, "shared.attn");
    worst.add("attention", check_param_gradients(
                               [&](Tape& t, const ParamStore& s) {
                                 return project(self_attention(t.constant(x), SelfAttnParams::bind(t, s)), wz);
                               },
                               attn));
    worst.add("attention-input", check_input_gradients(
                                     [&](Tape& t, const std::vector<Var>& v) {
                                       return project(self_attention(v[0], SelfAttnParams::bind(t, full)), wz);
                                     },
                                     {x}));

    // The top-k mask is a discrete choice and is held fixed.
    const auto mask = learn_structure(full.get("pred.embedding"), cfg.top_k);
    auto gat = [&](Tape& t, const ParamStore& s, Var z) {
      auto emb = bind_embedding(t, s);
      auto p = GatParams::bind(t, s);
      return project(predict(gat_forward(z, emb, mask, p).z, emb, p.f), wf);
    };
    worst.add("gat", check_param_gradients([&](Tape& t, const ParamStore& s) { return gat(t, s, t.constant(x)); },
                                           subset(full, "pred.")));
    worst.add("gat-input",
              check_input_gradients([&](Tape& t, const std::vector<Var>& v) { return gat(t, full, v[0]); }, {x}));

    const Tensor eps = draw_eps(rng, kL);
    auto vae = [&](Tape& t, const ParamStore& s, Var z) {
      const auto p = VaeParams::bind(t, s);
      const auto post = encode(ops::reshape(z, {1, kD * kN}), p);
      const auto smp = reparameterize(post.mu, post.logvar, eps);
      return project(decode(smp.z, p, kD, kN), wz);
    };
    worst.add("vae", check_param_gradients([&](Tape& t, const ParamStore& s) { return vae(t, s, t.constant(x)); },
                                           subset(full, "recon.")));
    worst.add("vae-input",
              check_input_gradients([&](Tape& t, const std::vector<Var>& v) { return vae(t, full, v[0]); }, {x}));

    const Tensor target = random_tensor(rng, 1, kN, 0.0, 1.0);
    worst.add("loss_pred", check_input_gradients(
                               [&](Tape&, const std::vector<Var>& v) { return loss_pred(v[0], target); },
                               {random_tensor(rng, 1, kN)}));
    worst.add("loss_recon", check_input_gradients(
                                [&](Tape&, const std::vector<Var>& v) { return loss_recon(v[0], x, v[1], v[2]); },
                                {random_tensor(rng, kD, kN), random_tensor(rng, 1, kL), random_tensor(rng, 1, kL)}));

    // Whole model under the combined objective.
    const double alpha = rng.uniform();
    worst.add("combined", check_param_gradients(
                              [&](Tape& t, const ParamStore& s) {
                                const Model m(cfg, s);
                                const auto bound = m.bind(t);
                                const auto fw = m.forward(t, bound, &mask, x, &eps);
                                auto lp = loss_pred(*fw.forecast, target);
                                auto lr = loss_recon(*fw.reconstruction, x, fw.latent->mu, fw.latent->logvar);
                                return ops::add(ops::scale(lp, alpha), ops::scale(lr, 1.0 - alpha));
                              },
                              full));
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "max rel error " << worst.err << " over " << worst.checked << " entries, " << secs << " s";
  if (worst.err > kGradTol) os << "; worst at " << worst.where;
  return {worst.err <= kGradTol && secs < 60.0, os.str()};
}

// ---------------------------------------------------------------- 2, 3

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double combo_sq(const std::vector<double>& a, const std::vector<double>& b, double al) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(al * a[i] + (1 - al) * b[i], 2);
  return s;
}

Outcome mgda_oracle() {
  Rng rng(2);
  double max_dalpha = 0.0, max_excess = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 100; ++c) {
    const auto n = static_cast<std::size_t>(rng.integer(8, 64));
    const auto g1 = random_vec(rng, n), g2 = random_vec(rng, n);
    const double a = mgda_alpha(g1, g2);
    double best_a = 0.0, best = std::numeric_limits<double>::infinity();
    const double closed = std::sqrt(combo_sq(g1, g2, a));
    for (int k = 0; k <= 1000; ++k) {
      const double al = k / 1000.0, v = combo_sq(g1, g2, al);
      if (v < best) best = v, best_a = al;
      max_excess = std::max(max_excess, closed - std::sqrt(v));
    }
    max_dalpha = std::max(max_dalpha, std::abs(a - best_a));
  }
  const bool examples = mgda_alpha(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.5 &&
                        mgda_alpha(std::vector<double>{2, 0}, std::vector<double>{1, 0}) == 0.0 &&
                        mgda_alpha(std::vector<double>{0.4, -2}, std::vector<double>{0.4, -2}) == 0.5;
  std::ostringstream os;
  os << "max |dalpha| " << max_dalpha << ", max norm excess over grid " << max_excess
     << ", examples " << (examples ? "ok" : "wrong");
  return {max_dalpha <= 5e-3 && max_excess <= 1e-9 && examples, os.str()};
}

Outcome descent_property() {
  Rng rng(3);
  int cases = 0, good = 0;
  double min_dot = std::numeric_limits<double>::infinity();
  while (cases < 100) {
    const auto n = static_cast<std::size_t>(rng.integer(8, 64));
    const auto g1 = random_vec(rng, n), g2 = random_vec(rng, n);
    const double a = mgda_alpha(g1, g2);
    if (a <= 0.01 || a >= 0.99) continue;
    ++cases;
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = a * g1[i] + (1 - a) * g2[i];
      d1 += v * g1[i];
      d2 += v * g2[i];
    }
    min_dot = std::min({min_dot, d1, d2});
    good += d1 >= 0.0 && d2 >= 0.0;
  }
  std::ostringstream os;
  os << good << "/" << cases << " interior cases with nonnegative dot products, min " << min_dot;
  return {good == cases, os.str()};
}

// ---------------------------------------------------------------- 4

double brute_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Outcome scoring_oracle() {
  Rng rng(4);
  double max_diff = 0.0;
  for (int c = 0; c < 50; ++c) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 10));
    const auto tv = static_cast<std::size_t>(rng.integer(2, 60));
    const auto tt = static_cast<std::size_t>(rng.integer(1, 60));
    std::vector<std::size_t> times_v(tv), times_t(tt);
    std::iota(times_v.begin(), times_v.end(), 0);
    std::iota(times_t.begin(), times_t.end(), tv);
    const Tensor vp = random_tensor(rng, tv, n), vr = random_tensor(rng, tv, n), vh = random_tensor(rng, tv, n);
    const Tensor tp = random_tensor(rng, tt, n), trc = random_tensor(rng, tt, n), th = random_tensor(rng, tt, n);

    const auto stats = fit_robust_stats(compute_errors(times_v, vp, vr, vh));
    const auto A = aggregate(robust_normalize(compute_errors(times_t, tp, trc, th), stats));

    for (std::size_t t = 0; t < tt; ++t) {
      double ref = -std::numeric_limits<double>::infinity();
      for (const auto& [val, test] : {std::pair{&vp, &tp}, std::pair{&vr, &trc}})
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<double> col;
          for (std::size_t s = 0; s < tv; ++s) col.push_back(std::abs(vh.at(s, i) - val->at(s, i)));
          const double med = brute_quantile(col, 0.5);
          const double iqr = std::max(brute_quantile(col, 0.75) - brute_quantile(col, 0.25), 1e-6);
          ref = std::max(ref, (std::abs(th.at(t, i) - test->at(t, i)) - med) / iqr);
        }
      max_diff = std::max(max_diff, std::abs(A[t] - ref));
    }
  }
  const std::vector<double> e{1, 2, 3, 4, 5};
  const auto ex = compute_errors({0, 1, 2, 3, 4}, Tensor::matrix(5, 1, e), Tensor{}, Tensor::zeros({5, 1}));
  const auto st = fit_robust_stats(ex);
  const double a5 = robust_normalize(ex, st).pred.at(4, 0);
  std::ostringstream os;
  os << "max |A - oracle| " << max_diff << " over 50 cases; [1..5] example gives " << a5;
  return {max_diff <= 1e-12 && a5 == 1.0, os.str()};
}

// ---------------------------------------------------------------- 5

Outcome structure_properties() {
  Rng rng(5);
  bool ok = true;
  double max_asym = 0.0;
  for (int c = 0; c < 200; ++c) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 20));
    const auto k = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(n) - 1));
    const auto m = learn_structure(random_tensor(rng, n, static_cast<std::size_t>(rng.integer(1, 16))), k);
    for (std::size_t i = 0; i < n; ++i) {
      double col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        col += m.adjacency.at(j, i);
        max_asym = std::max(max_asym, std::abs(m.similarity.at(i, j) - m.similarity.at(j, i)));
      }
      ok &= col == static_cast<double>(k) && m.adjacency.at(i, i) == 0.0;
    }
  }
  const double c1 = learn_structure(Tensor::matrix({{1, 2}, {2, 4}}), 1).similarity.at(0, 1);
  const double c0 = learn_structure(Tensor::matrix({{1, 0}, {0, 1}}), 1).similarity.at(0, 1);
  const double c96 = learn_structure(Tensor::matrix({{3, 4}, {4, 3}}), 1).similarity.at(0, 1);
  const bool examples = std::abs(c1 - 1.0) <= 1e-15 && c0 == 0.0 && std::abs(c96 - 0.96) <= 1e-15;
  std::ostringstream os;
  os << "exact-k and zero diagonal " << (ok ? "hold" : "violated") << " on 200 graphs, max asymmetry " << max_asym
     << ", cosine examples " << c1 << " " << c0 << " " << c96;
  return {ok && max_asym <= 1e-12 && examples, os.str()};
}

// ---------------------------------------------------------------- 6

Outcome metrics_check() {
  const double f1 = f1_score(0.9950, 0.7695);
  const auto perfect = metrics(std::vector<int>{1, 0, 0}, std::vector<int>{1, 0, 0});
  const auto empty = metrics(std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 0});
  const bool trivial = perfect.precision == 1.0 && perfect.recall == 1.0 && perfect.f1 == 1.0 &&
                       empty.precision == 0.0 && empty.recall == 0.0 && empty.f1 == 0.0;
  std::ostringstream os;
  os << "F1(0.9950, 0.7695) = " << f1 << ", trivial cases " << (trivial ? "exact" : "wrong");
  return {std::abs(f1 - 0.8678) <= 5e-4 && trivial, os.str()};
}

// ---------------------------------------------------------------- 7, 8, 9

struct ToolRun {
  int code;
  std::string output;
};

ToolRun run_tool(const std::string& args) {
  FILE* p = popen((std::string(MGADN_BIN) + " " + args + " 2>&1").c_str(), "r");
  if (!p) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::optional<double> parse_f1(const std::string& text) {
  std::smatch m;
  if (std::regex_search(text, m, std::regex(R"(f1=([0-9.eE+-]+))"))) return std::stod(m[1]);
  return std::nullopt;
}

Outcome end_to_end(const fs::path& dir) {
  const auto t0 = Clock::now();
  const auto data = dir / "e2e.csv", ckpt = dir / "e2e.json";
  std::string log;
  auto step = [&](const std::string& args) {
    const auto r = run_tool(args);
    log += r.output;
    return r.code == 0;
  };
  const bool ran = step("synth --sensors 8 --steps 2000 --rate 0.05 --seed 1 -o " + quoted(data)) &&
                   step("train -d " + quoted(data) + " --window 5 --top-k 5 --epochs 50 --mode mgda_ub --seed 1 -o " +
                        quoted(ckpt) + " --log " + quoted(dir / "e2e.log")) &&
                   step("eval -c " + quoted(ckpt) + " -d " + quoted(data) + " --split test -o " +
                        quoted(dir / "e2e_scores.csv"));
  const double secs = seconds_since(t0);
  const auto f1 = parse_f1(log);
  std::ostringstream os;
  if (!ran || !f1) return {false, "pipeline did not complete: " + log};
  os << "test F1 " << *f1 << " in " << secs << " s";
  return {*f1 >= 0.80 && secs <= 300.0, os.str()};
}

double variant_f1(const fs::path& dir, std::uint64_t seed, const std::function<void(cli::RunConfig&)>& tweak) {
  std::ostringstream sink;
  const auto data = dir / ("ab_" + std::to_string(seed) + ".csv");
  if (!fs::exists(data)) cli::cmd_synth({.options = {.n_sensors = 8, .n_steps = 2000, .anomaly_rate = 0.05, .seed = seed},
                                          .out = data},
                                         sink);
  cli::RunConfig c;
  c.data = data;
  c.seed = seed;
  tweak(c);
  cli::cmd_train({.config = c, .out = dir / "ab.json", .log = dir / "ab.log"}, sink);
  std::ostringstream out;
  cli::cmd_eval({.checkpoint = dir / "ab.json", .data = data, .out = dir / "ab_scores.csv"}, out);
  return parse_f1(out.str()).value_or(0.0);
}

Outcome ablation_ordering(const fs::path& dir) {
  const std::vector<std::pair<std::string, std::function<void(cli::RunConfig&)>>> variants{
      {"full", [](cli::RunConfig&) {}},
      {"alt", [](cli::RunConfig& c) { c.no_mgda = true; }},
      {"pred-only", [](cli::RunConfig& c) { c.no_vae_head = true; }},
      {"recon-only", [](cli::RunConfig& c) { c.no_pred_head = true; }},
  };
  std::vector<double> mean(variants.size(), 0.0);
  std::ostringstream os;
  os.precision(4);
  for (std::size_t v = 0; v < variants.size(); ++v) {
    os << (v ? "; " : "") << variants[v].first << " [";
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const double f1 = variant_f1(dir, seed, variants[v].second);
      os << (seed > 1 ? " " : "") << f1;
      mean[v] += f1 / 3.0;
    }
    os << "] mean " << mean[v];
  }
  const bool ok = mean[0] >= mean[1] && mean[0] >= mean[2] && mean[0] >= mean[3];
  return {ok, os.str()};
}

Outcome determinism(const fs::path& dir) {
  std::ostringstream sink;
  const auto data = dir / "det.csv";
  cli::cmd_synth({.options = {.n_sensors = 8, .n_steps = 2000, .seed = 9}, .out = data}, sink);
  std::vector<std::string> ckpts, scores;
  std::vector<std::vector<double>> series;
  for (int run = 0; run < 2; ++run) {
    cli::RunConfig c;
    c.data = data;
    c.seed = 9;
    c.epochs = 3;
    const auto ck = dir / ("det_" + std::to_string(run) + ".json");
    const auto sc = dir / ("det_" + std::to_string(run) + ".csv");
    cli::cmd_train({.config = c, .out = ck, .log = dir / "det.log"}, sink);
    cli::cmd_eval({.checkpoint = ck, .data = data, .out = sc, .per_sensor = true}, sink);
    ckpts.push_back(read_file(ck));
    scores.push_back(read_file(sc));
    series.push_back(parse_score_csv(scores.back()).A);
  }
  const bool same_ckpt = ckpts[0] == ckpts[1];
  const bool same_series = series[0] == series[1] && scores[0] == scores[1];
  std::ostringstream os;
  os << "checkpoints " << (same_ckpt ? "identical" : "differ") << " (" << ckpts[0].size() << " bytes), A(t) series "
     << (same_series ? "identical" : "differ") << " (" << series[0].size() << " points)";
  return {same_ckpt && same_series, os.str()};
}

// ---------------------------------------------------------------- 10

Outcome invariants() {
  Rng rng(10);
  bool kl_ok = true;
  double kl_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    Tape t;
    const Tensor mu = random_tensor(rng, 1, 3, -3, 3), lv = random_tensor(rng, 1, 3, -4, 4);
    const double v = kl_term(t.constant(mu), t.constant(lv)).value().item();
    kl_min = std::min(kl_min, v);
    kl_ok &= v > 0.0;
  }
  {
    Tape t;
    kl_ok &= kl_term(t.constant(Tensor::zeros({1, 3})), t.constant(Tensor::zeros({1, 3}))).value().item() == 0.0;
  }

  double max_dev = 0.0;
  std::size_t rows = 0;
  auto check_rows = [&](const Tensor& w) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < w.cols(); ++c) s += w.at(r, c);
      max_dev = std::max(max_dev, std::abs(s - 1.0));
      ++rows;
    }
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ModelConfig cfg{.n_sensors = 6, .window = 5, .top_k = 3, .embed_dim = 4};
    const ParamStore p = init_params(model_param_specs(cfg), seed);
    const Tensor x = random_tensor(rng, 5, 6, -3.0, 3.0);
    Tape t;
    Tensor weights;
    auto z = self_attention(t.constant(x), SelfAttnParams::bind(t, p), &weights);
    check_rows(weights);
    const auto mask = learn_structure(p.get("pred.embedding"), cfg.top_k);
    check_rows(gat_forward(z, bind_embedding(t, p), mask, GatParams::bind(t, p)).alpha);
  }
  std::ostringstream os;
  os << "KL min over 1000 random inputs " << kl_min << " (zero only at the prior), max |sum(alpha) - 1| " << max_dev
     << " over " << rows << " attention rows";
  return {kl_ok && max_dev <= 1e-12, os.str()};
}

}  // namespace

// With arguments, runs only the listed criterion numbers.
int main(int argc, char** argv) {
  const fs::path dir = fs::temp_directory_path() / "mgadn_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"MGDA oracle", mgda_oracle},
      {"descent property", descent_property},
      {"scoring oracle", scoring_oracle},
      {"structure properties", structure_properties},
      {"metrics check", metrics_check},
      {"synthetic end-to-end", [&] { return end_to_end(dir); }},
      {"ablation ordering", [&] { return ablation_ordering(dir); }},
      {"determinism", [&] { return determinism(dir); }},
      {"KL and softmax invariants", invariants},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const auto k = static_cast<std::size_t>(std::atoi(argv[a]));
    if (k >= 1 && k <= criteria.size()) selected[k - 1] = true;
  }
  int failures = 0;
  std::size_t ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  fs::remove_all(dir);
  std::cout << (ran - static_cast<std::size_t>(failures)) << "/" << ran << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
