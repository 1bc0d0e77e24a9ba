#pragma once

#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgadn/params.hpp"
#include "mgadn/tensor.hpp"

namespace mgadn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  friend class Gradients;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Adjoints produced by one reverse sweep.
class Gradients {
 public:
  // d(output)/d(v); zeros when v is not on the output's path.
  Tensor wrt(Var v) const;
  Tensor at_tag(std::string_view label) const;
  // Gradient for every parameter in the store. Parameters that were never
  // placed on the tape, or are off the output's path, get zeros.
  GradMap params(const ParamStore& store) const;

 private:
  friend class Tape;
  Gradients(const Tape* tape, std::vector<std::vector<double>> adjoints)
      : tape_(tape), adjoints_(std::move(adjoints)) {}

  const Tape* tape_;
  std::vector<std::vector<double>> adjoints_;
};

// Local vector-Jacobian product: receives the node's output adjoint and one
// accumulator per parent (empty when that parent needs no gradient).
using VjpFn = std::function<void(std::span<const double> grad, std::span<const std::span<double>> parents)>;

// Append-only record of primitive operations. Nodes are stored in creation
// order, which is a topological order since parents must already exist.
//
// Not thread-safe; build one tape per forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Differentiable leaf that is not a parameter (inputs under test, etc.).
  Var variable(Tensor value);
  // Leaf bound to a ParamStore entry. Repeated requests return the same node.
  Var parameter(const ParamStore& store, std::string_view name);

  void tag(std::string label, Var v);
  Var tagged(std::string_view label) const;
  bool has_tag(std::string_view label) const;

  Gradients backward(Var loss) const;
  Gradients backward_from(Var output, const Tensor& seed) const;

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  std::string_view op_name(std::size_t id) const { return nodes_[id].op; }

  // Appends a node. Throws NumericError naming the op and node index when
  // the value holds NaN or Inf.
  Var record(std::string_view op, Tensor value, std::vector<std::size_t> parents, VjpFn vjp);

 private:
  friend class Gradients;
  struct Node {
    std::string_view op;
    Tensor value;
    std::vector<std::size_t> parents;
    VjpFn vjp;
    bool requires_grad;
  };

  Var leaf(std::string_view op, Tensor value, bool requires_grad);

  std::deque<Node> nodes_;
  std::map<std::string, std::size_t, std::less<>> tags_;
  std::map<std::string, std::size_t, std::less<>> params_;
};

// Gradient of a scalar loss with respect to the node tagged `label`.
Tensor grad_at_tag(const Tape& tape, Var loss, std::string_view label);

namespace ops {

inline constexpr double kLeakySlope = 0.2;

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// Sum of same-shaped tensors.
Var add_n(const std::vector<Var>& xs);
// a (m x n) plus row vector b (1 x n) broadcast over rows.
Var add_row(Var a, Var b);
// Column a (m x 1) and row b (1 x n): out[i][j] = a[i] + b[j].
Var outer_sum(Var a, Var b);
Var scale(Var a, double c);
Var shift(Var a, double c);

Var concat_cols(const std::vector<Var>& xs);
Var concat_rows(const std::vector<Var>& xs);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var reshape(Var a, Shape shape);

Var relu(Var a);
Var leaky_relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var expm1(Var a);
Var log(Var a);

// Row-wise softmax over the last axis.
Var softmax_rows(Var a);
// Row-wise softmax restricted to entries where mask != 0; masked entries are
// exactly zero. Every row needs at least one unmasked entry.
Var masked_softmax_rows(Var a, const Tensor& mask);

// Scalar reductions.
Var l1_norm(Var a);
Var sum_squares(Var a);
Var sum(Var a);
Var mean(Var a);

}  // namespace ops
}  // namespace mgadn
