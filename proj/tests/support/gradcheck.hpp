#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/params.hpp"
#include "mgadn/rng.hpp"

namespace mgadn::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTol = 1e-4;
// Denominator floor for the relative error, per unit of |loss|. Central
// differences carry round-off of order eps * |loss| / step, so gradients
// below kRelFloor * max(1, |loss|) are compared absolutely.
inline constexpr double kRelFloor = 1e-6;

inline Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::matrix(rows, cols, std::move(v));
}

// Uniform values with |x| >= gap, for primitives with a kink at zero.
inline Tensor random_away_from_zero(Rng& rng, std::size_t rows, std::size_t cols, double gap = 0.05) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) {
    const double m = rng.uniform(gap, 1.0);
    x = rng.uniform() < 0.5 ? -m : m;
  }
  return Tensor::matrix(rows, cols, std::move(v));
}

inline double relative_error(double analytic, double numeric, double floor = kRelFloor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double loss_floor(double loss) { return kRelFloor * std::max(1.0, std::abs(loss)); }

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

inline void record(GradCheck& r, double analytic, double numeric, double floor, const std::string& where) {
  const double e = relative_error(analytic, numeric, floor);
  ++r.checked;
  if (e > r.max_rel_error) {
    r.max_rel_error = e;
    r.worst = where + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
  }
}

inline Tensor with_entry(const Tensor& t, std::size_t i, double value) {
  std::vector<double> v = t.storage();
  v[i] = value;
  return Tensor(t.shape(), std::move(v));
}

using InputLoss = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central differences on every entry of every input.
inline GradCheck check_input_gradients(const InputLoss& f, const std::vector<Tensor>& inputs,
                                       double step = kFdStep) {
  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& x : xs) vars.push_back(tape.variable(x));
    return f(tape, vars).value().item();
  };
  Tape tape;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.variable(x));
  const Var loss = f(tape, vars);
  const double floor = loss_floor(loss.value().item());
  const auto grads = tape.backward(loss);

  GradCheck r;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor g = grads.wrt(vars[k]);
    for (std::size_t i = 0; i < inputs[k].numel(); ++i) {
      auto plus = inputs, minus = inputs;
      plus[k] = with_entry(inputs[k], i, inputs[k][i] + step);
      minus[k] = with_entry(inputs[k], i, inputs[k][i] - step);
      const double numeric = (eval(plus) - eval(minus)) / (2.0 * step);
      record(r, g[i], numeric, floor, "input " + std::to_string(k) + "[" + std::to_string(i) + "]");
    }
  }
  return r;
}

using ParamLoss = std::function<Var(Tape&, const ParamStore&)>;

// Central differences on every entry of every parameter in `store`.
inline GradCheck check_param_gradients(const ParamLoss& f, ParamStore store, double step = kFdStep) {
  auto eval = [&](const ParamStore& s) {
    Tape tape;
    return f(tape, s).value().item();
  };
  Tape tape;
  const Var loss = f(tape, store);
  const double floor = loss_floor(loss.value().item());
  const auto grads = tape.backward(loss).params(store);

  GradCheck r;
  for (const auto& name : store.names()) {
    const Tensor original = store.get(name);
    const Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < original.numel(); ++i) {
      store.set(name, with_entry(original, i, original[i] + step));
      const double up = eval(store);
      store.set(name, with_entry(original, i, original[i] - step));
      const double down = eval(store);
      store.set(name, original);
      record(r, g[i], (up - down) / (2.0 * step), floor, name + "[" + std::to_string(i) + "]");
    }
  }
  return r;
}

// Random linear functional of a tensor-valued output, so every output entry
// contributes with a distinct weight.
inline Var project(Var y, const Tensor& weights) {
  auto& tape = y.tape();
  return ops::sum(ops::mul(y, tape.constant(weights)));
}

}  // namespace mgadn::testing
