#pragma once

#include <string_view>
#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/params.hpp"

namespace mgadn {

// One LSTM direction. Gate columns are ordered input, forget, output,
// candidate: w_ih (N x 4H), w_hh (H x 4H), bias (1 x 4H).
struct LstmCellParams {
  Var w_ih;
  Var w_hh;
  Var bias;
};

// Single-layer bidirectional LSTM with hidden size equal to the sensor count.
struct BiLstmParams {
  LstmCellParams forward;
  LstmCellParams backward;

  static BiLstmParams bind(Tape& tape, const ParamStore& store);
};

// Q = X W_q, K = X W_k, V = X W_v over a (d x N) sequence X; scores are
// scaled by 1/sqrt(N).
struct SelfAttnParams {
  Var w_q;
  Var w_k;
  Var w_v;

  static SelfAttnParams bind(Tape& tape, const ParamStore& store);
};

struct SharedLayerParams {
  BiLstmParams lstm;
  SelfAttnParams attn;

  static SharedLayerParams bind(Tape& tape, const ParamStore& store);
};

// Parameter layout of the shared partition for `n_sensors` sensors.
std::vector<ParamSpec> shared_layer_specs(std::size_t n_sensors);

// window: d x N (row r = timestamp r). Returns d x N where row t is the mean
// of the forward and backward hidden states at t. Zero initial states.
Var bilstm_forward(Var window, const BiLstmParams& params);

// softmax over keys of Q K^T / sqrt(N), applied to V. `weights`, when
// given, receives the d x d attention matrix.
Var self_attention(Var seq, const SelfAttnParams& params, Tensor* weights = nullptr);

// Z = self_attention(bilstm_forward(window)), tagged on the tape as `tag`.
Var shared_forward(Var window, const SharedLayerParams& params, std::string_view tag = "Z");

}  // namespace mgadn
