#include "mgadn/forecast_head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mgadn/error.hpp"

namespace mgadn {

std::vector<std::size_t> AdjacencyMask::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j)
    if (adjacency.at(j, i) != 0.0) out.push_back(j);
  return out;
}

Tensor AdjacencyMask::attention_support() const {
  const std::size_t n = size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m[i * n + i] = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (adjacency.at(j, i) != 0.0) m[i * n + j] = 1.0;
  }
  return Tensor::matrix(n, n, std::move(m));
}

AdjacencyMask learn_structure(const Tensor& embedding, std::size_t k) {
  const std::size_t n = embedding.rows(), w = embedding.cols();
  if (embedding.rank() != 2 || n < 2) throw ShapeError("learn_structure: embedding must be N x w with N >= 2");
  if (k < 1 || k > n - 1) {
    throw ConfigError("neighbour count k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  }
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < w; ++c) s += embedding.at(i, c) * embedding.at(i, c);
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) throw NumericError("learn_structure: embedding " + std::to_string(i) + " is the zero vector");
  }
  std::vector<double> e(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) {
        e[j * n + i] = 1.0;
        continue;
      }
      if (i < j) {
        e[j * n + i] = e[i * n + j];
        continue;
      }
      double dot = 0.0;
      for (std::size_t c = 0; c < w; ++c) dot += embedding.at(i, c) * embedding.at(j, c);
      e[j * n + i] = dot / (norms[i] * norms[j]);
    }
  }

  std::vector<double> a(n * n, 0.0);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) candidates.push_back(j);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t x, std::size_t y) { return e[x * n + i] > e[y * n + i]; });
    for (std::size_t r = 0; r < k; ++r) a[candidates[r] * n + i] = 1.0;
  }
  return AdjacencyMask{Tensor::matrix(n, n, std::move(e)), Tensor::matrix(n, n, std::move(a)), k};
}

GatParams GatParams::bind(Tape& tape, const ParamStore& store) {
  return {tape.parameter(store, "pred.gat.w"), tape.parameter(store, "pred.gat.a"), Mlp::bind(tape, store, "pred.out", 2)};
}

std::vector<ParamSpec> forecast_head_specs(std::size_t n, std::size_t d, std::size_t w, std::size_t hidden) {
  std::vector<ParamSpec> specs{
      {Partition::pred, "pred.embedding", n, w, w},
      {Partition::pred, "pred.gat.w", w, d, d},
      {Partition::pred, "pred.gat.a", 4 * w, 1, 2 * w},
  };
  auto mlp = Mlp::specs(Partition::pred, "pred.out", {n * w, hidden, n});
  specs.insert(specs.end(), mlp.begin(), mlp.end());
  return specs;
}

Var bind_embedding(Tape& tape, const ParamStore& store) { return tape.parameter(store, "pred.embedding"); }

GatOutput gat_forward(Var Z, Var embedding, const AdjacencyMask& mask, const GatParams& params) {
  const auto& zv = Z.value();
  const std::size_t n = zv.cols(), d = zv.rows();
  const auto& wv = params.w.value();
  const std::size_t w = wv.rows();
  if (wv.cols() != d) throw ShapeError("gat: W must be w x d with d = " + std::to_string(d));
  if (embedding.value().rows() != n || embedding.value().cols() != w) throw ShapeError("gat: embedding must be N x w");
  if (params.a.value().rows() != 4 * w || params.a.value().cols() != 1) throw ShapeError("gat: a must be 4w x 1");
  if (mask.size() != n) throw ShapeError("gat: adjacency size does not match sensor count");

  // Row i of wx is W x_i.
  Var wx = ops::matmul(ops::transpose(Z), ops::transpose(params.w));
  Var g = ops::concat_cols({embedding, wx});
  Var dst = ops::matmul(g, ops::slice_rows(params.a, 0, 2 * w));
  Var src = ops::matmul(g, ops::slice_rows(params.a, 2 * w, 4 * w));
  Var logits = ops::leaky_relu(ops::outer_sum(dst, ops::transpose(src)));
  Var alpha = ops::masked_softmax_rows(logits, mask.attention_support());
  Var z = ops::relu(ops::matmul(alpha, wx));
  return {z, alpha.value()};
}

Var predict(Var z, Var embedding, const Mlp& f) {
  if (z.value().shape() != embedding.value().shape()) {
    throw ShapeError("predict: node features " + shape_string(z.value().shape()) + " vs embeddings " +
                     shape_string(embedding.value().shape()));
  }
  Var features = ops::reshape(ops::mul(embedding, z), Shape{1, z.value().numel()});
  return f(features);
}

}  // namespace mgadn
