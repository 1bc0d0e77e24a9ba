#include "mgadn/shared_layer.hpp"

#include <cmath>
#include <string>

#include "mgadn/error.hpp"

namespace mgadn {
namespace {

LstmCellParams bind_cell(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return {tape.parameter(store, prefix + ".w_ih"), tape.parameter(store, prefix + ".w_hh"),
          tape.parameter(store, prefix + ".b")};
}

// Hidden states for one direction, in processing order.
std::vector<Var> run_direction(Var projected, const LstmCellParams& p, bool reverse) {
  const std::size_t d = projected.value().rows();
  const std::size_t H = p.w_hh.value().rows();
  std::vector<Var> hidden(d);
  Var h, c;
  for (std::size_t step = 0; step < d; ++step) {
    const std::size_t t = reverse ? d - 1 - step : step;
    Var pre = ops::slice_rows(projected, t, t + 1);
    if (step > 0) pre = ops::add(pre, ops::matmul(h, p.w_hh));
    Var gates = ops::sigmoid(ops::slice_cols(pre, 0, 3 * H));
    Var cand = ops::tanh(ops::slice_cols(pre, 3 * H, 4 * H));
    Var in_gate = ops::slice_cols(gates, 0, H);
    Var out_gate = ops::slice_cols(gates, 2 * H, 3 * H);
    Var ic = ops::mul(in_gate, cand);
    if (step > 0) {
      Var forget = ops::slice_cols(gates, H, 2 * H);
      c = ops::add(ops::mul(forget, c), ic);
    } else {
      c = ic;
    }
    h = ops::mul(out_gate, ops::tanh(c));
    hidden[t] = h;
  }
  return hidden;
}

void check_cell(const LstmCellParams& p, std::size_t n) {
  const auto& wih = p.w_ih.value();
  const auto& whh = p.w_hh.value();
  const auto& b = p.bias.value();
  const std::size_t H = whh.rows();
  if (H != n || wih.rows() != n || wih.cols() != 4 * H || whh.cols() != 4 * H || b.cols() != 4 * H || b.rows() != 1) {
    throw ShapeError("bilstm: parameter shapes do not match a window with " + std::to_string(n) + " sensors");
  }
}

}  // namespace

BiLstmParams BiLstmParams::bind(Tape& tape, const ParamStore& store) {
  return {bind_cell(tape, store, "shared.lstm.fwd"), bind_cell(tape, store, "shared.lstm.bwd")};
}

SelfAttnParams SelfAttnParams::bind(Tape& tape, const ParamStore& store) {
  return {tape.parameter(store, "shared.attn.w_q"), tape.parameter(store, "shared.attn.w_k"),
          tape.parameter(store, "shared.attn.w_v")};
}

SharedLayerParams SharedLayerParams::bind(Tape& tape, const ParamStore& store) {
  return {BiLstmParams::bind(tape, store), SelfAttnParams::bind(tape, store)};
}

std::vector<ParamSpec> shared_layer_specs(std::size_t n) {
  std::vector<ParamSpec> specs;
  for (const std::string dir : {"fwd", "bwd"}) {
    const std::string prefix = "shared.lstm." + dir;
    specs.push_back({Partition::shared, prefix + ".w_ih", n, 4 * n, n});
    specs.push_back({Partition::shared, prefix + ".w_hh", n, 4 * n, n});
    specs.push_back({Partition::shared, prefix + ".b", 1, 4 * n, 0});
  }
  for (const std::string m : {"w_q", "w_k", "w_v"}) specs.push_back({Partition::shared, "shared.attn." + m, n, n, n});
  return specs;
}

Var bilstm_forward(Var window, const BiLstmParams& params) {
  const std::size_t n = window.value().cols();
  if (window.value().rank() != 2 || window.value().rows() == 0) throw ShapeError("bilstm: window must be d x N");
  check_cell(params.forward, n);
  check_cell(params.backward, n);

  auto fwd = run_direction(ops::add_row(ops::matmul(window, params.forward.w_ih), params.forward.bias),
                           params.forward, false);
  auto bwd = run_direction(ops::add_row(ops::matmul(window, params.backward.w_ih), params.backward.bias),
                           params.backward, true);
  return ops::scale(ops::add(ops::concat_rows(fwd), ops::concat_rows(bwd)), 0.5);
}

Var self_attention(Var seq, const SelfAttnParams& params, Tensor* weights) {
  const auto& x = seq.value();
  const std::size_t n = x.cols();
  if (x.rank() != 2 || x.rows() == 0) throw ShapeError("self_attention: sequence must be d x N");
  for (Var w : {params.w_q, params.w_k, params.w_v}) {
    if (w.value().rows() != n || w.value().cols() != n) throw ShapeError("self_attention: projections must be N x N");
  }
  Var q = ops::matmul(seq, params.w_q);
  Var k = ops::matmul(seq, params.w_k);
  Var v = ops::matmul(seq, params.w_v);
  Var scores = ops::scale(ops::matmul(q, ops::transpose(k)), 1.0 / std::sqrt(static_cast<double>(n)));
  Var attn = ops::softmax_rows(scores);
  if (weights) *weights = attn.value();
  return ops::matmul(attn, v);
}

Var shared_forward(Var window, const SharedLayerParams& params, std::string_view tag) {
  Var z = self_attention(bilstm_forward(window, params.lstm), params.attn);
  window.tape().tag(std::string(tag), z);
  return z;
}

}  // namespace mgadn
