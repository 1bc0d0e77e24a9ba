#pragma once

#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/layers.hpp"
#include "mgadn/params.hpp"

namespace mgadn {

// Learned sensor graph. similarity(j, i) is the cosine similarity e_ji of
// embeddings v_j and v_i; adjacency(j, i) = 1 when j is one of the k
// in-neighbours selected for destination i. Every column of adjacency holds
// exactly k ones and the diagonal is zero.
struct AdjacencyMask {
  Tensor similarity;
  Tensor adjacency;
  std::size_t k = 0;

  std::size_t size() const { return adjacency.rows(); }
  std::vector<std::size_t> neighbors(std::size_t i) const;
  // Row i marks the softmax support of destination i: its neighbours and i.
  Tensor attention_support() const;
};

// Top-k in-neighbours per sensor by cosine similarity of the rows of
// `embedding` (N x w). Candidates exclude the sensor itself; ties go to the
// lower index.
AdjacencyMask learn_structure(const Tensor& embedding, std::size_t k);

// W (w x d) is shared by every sensor; a (4w x 1) scores g_i (+) g_j;
// f maps the flattened (N * w) node features to N outputs.
struct GatParams {
  Var w;
  Var a;
  Mlp f;

  static GatParams bind(Tape& tape, const ParamStore& store);
};

// Parameter layout of the pred partition: embedding "pred.embedding" (N x w)
// plus the attention and output stack (N*w -> mlp_hidden -> N).
std::vector<ParamSpec> forecast_head_specs(std::size_t n_sensors, std::size_t window, std::size_t embed_dim,
                                           std::size_t mlp_hidden);
Var bind_embedding(Tape& tape, const ParamStore& store);

struct GatOutput {
  Var z;         // N x w node representations
  Tensor alpha;  // N x N attention weights, row i over sources j
};

// Graph attention over sensors. x_i is column i of Z (d x N). Self is always
// part of the softmax support next to the masked neighbours.
GatOutput gat_forward(Var Z, Var embedding, const AdjacencyMask& mask, const GatParams& params);

// f([v_1 * z_1, ..., v_N * z_N]) as a 1 x N row.
Var predict(Var z, Var embedding, const Mlp& f);

}  // namespace mgadn
