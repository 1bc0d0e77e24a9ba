#include "mgadn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgadn/error.hpp"

namespace mgadn {

const Tensor& Var::value() const { return tape_->value(id_); }

// ---------------------------------------------------------------------------
// Gradients

Tensor Gradients::wrt(Var v) const {
  const auto& node_value = tape_->value(v.id());
  if (v.id() >= adjoints_.size() || adjoints_[v.id()].empty()) {
    return Tensor::zeros(node_value.shape());
  }
  return Tensor(node_value.shape(), adjoints_[v.id()]);
}

Tensor Gradients::at_tag(std::string_view label) const { return wrt(tape_->tagged(label)); }

GradMap Gradients::params(const ParamStore& store) const {
  GradMap out;
  for (const auto& name : store.names()) {
    auto it = tape_->params_.find(name);
    if (it == tape_->params_.end()) {
      out.emplace(name, Tensor::zeros(store.get(name).shape()));
    } else {
      out.emplace(name, wrt(Var(const_cast<Tape*>(tape_), it->second)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tape

Var Tape::leaf(std::string_view op, Tensor value, bool requires_grad) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value in " + std::string(op) + " (node " +
                       std::to_string(nodes_.size()) + ")");
  }
  nodes_.push_back(Node{op, std::move(value), {}, {}, requires_grad});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return leaf("constant", std::move(value), false); }

Var Tape::variable(Tensor value) { return leaf("variable", std::move(value), true); }

Var Tape::parameter(const ParamStore& store, std::string_view name) {
  if (auto it = params_.find(name); it != params_.end()) return Var(this, it->second);
  Var v = leaf("parameter", store.get(name), true);
  params_.emplace(std::string(name), v.id());
  return v;
}

void Tape::tag(std::string label, Var v) { tags_[std::move(label)] = v.id(); }

Var Tape::tagged(std::string_view label) const {
  auto it = tags_.find(label);
  if (it == tags_.end()) throw ConfigError("unknown tag '" + std::string(label) + "'");
  return Var(const_cast<Tape*>(this), it->second);
}

bool Tape::has_tag(std::string_view label) const { return tags_.find(label) != tags_.end(); }

Var Tape::record(std::string_view op, Tensor value, std::vector<std::size_t> parents, VjpFn vjp) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value in " + std::string(op) + " (node " +
                       std::to_string(nodes_.size()) + ")");
  }
  bool requires_grad = false;
  for (auto p : parents) requires_grad = requires_grad || nodes_[p].requires_grad;
  nodes_.push_back(Node{op, std::move(value), std::move(parents), std::move(vjp), requires_grad});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var loss) const {
  if (loss.value().numel() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  return backward_from(loss, Tensor::full(loss.shape(), 1.0));
}

Gradients Tape::backward_from(Var output, const Tensor& seed) const {
  if (output.valid() && &output.tape() != this) throw ConfigError("variable belongs to another tape");
  if (seed.numel() != output.value().numel()) throw ShapeError("backward seed shape mismatch");

  std::vector<std::vector<double>> adj(output.id() + 1);
  adj[output.id()] = seed.storage();
  std::vector<std::span<double>> parent_spans;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    if (adj[i].empty()) continue;
    const Node& node = nodes_[i];
    if (!node.vjp) continue;
    parent_spans.clear();
    bool any = false;
    for (auto p : node.parents) {
      if (!nodes_[p].requires_grad) {
        parent_spans.emplace_back();
        continue;
      }
      if (adj[p].empty()) adj[p].assign(nodes_[p].value.numel(), 0.0);
      parent_spans.emplace_back(adj[p]);
      any = true;
    }
    if (any) node.vjp(adj[i], parent_spans);
  }
  return Gradients(this, std::move(adj));
}

Tensor grad_at_tag(const Tape& tape, Var loss, std::string_view label) {
  Var node = tape.tagged(label);
  return tape.backward(loss).wrt(node);
}

// ---------------------------------------------------------------------------
// Primitives

namespace ops {
namespace {

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ConfigError("operands are not on the same tape");
  }
  return a.tape();
}

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename F, typename D>
Var unary_map(std::string_view op, Var a, F f, D dydx) {
  const Tensor& x = a.value();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  Tensor y(x.shape(), std::move(out));
  Tensor xin = x;
  Tensor yout = y;
  return a.tape().record(op, std::move(y), {a.id()},
                         [xin, yout, dydx](std::span<const double> g, std::span<const std::span<double>> p) {
                           auto ga = p[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dydx(xin[i], yout[i]);
                         });
}

template <typename D>
Var reduce_scalar(std::string_view op, Var a, double value, D dydx) {
  Tensor x = a.value();
  return a.tape().record(op, Tensor::scalar(value), {a.id()},
                         [x, dydx](std::span<const double> g, std::span<const std::span<double>> p) {
                           auto ga = p[0];
                           for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * dydx(x[i]);
                         });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor A = a.value();
  const Tensor B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
    throw ShapeError("matmul: " + shape_string(A.shape()) + " x " + shape_string(B.shape()));
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  std::vector<double> out(m * n, 0.0);
  const double* pa = A.data().data();
  const double* pb = B.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return tape.record("matmul", Tensor::matrix(m, n, std::move(out)), {a.id(), b.id()},
                     [A, B, m, k, n](std::span<const double> g, std::span<const std::span<double>> p) {
                       const double* pa = A.data().data();
                       const double* pb = B.data().data();
                       if (!p[0].empty()) {
                         auto ga = p[0];
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t q = 0; q < k; ++q) {
                             double s = 0.0;
                             for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * pb[q * n + j];
                             ga[i * k + q] += s;
                           }
                       }
                       if (!p[1].empty()) {
                         auto gb = p[1];
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t q = 0; q < k; ++q) {
                             const double av = pa[i * k + q];
                             for (std::size_t j = 0; j < n; ++j) gb[q * n + j] += av * g[i * n + j];
                           }
                       }
                     });
}

Var transpose(Var a) {
  const Tensor& x = a.value();
  if (x.rank() != 2) throw ShapeError("transpose needs a matrix");
  const std::size_t r = x.rows(), c = x.cols();
  return a.tape().record("transpose", x.transposed(), {a.id()},
                         [r, c](std::span<const double> g, std::span<const std::span<double>> p) {
                           auto ga = p[0];
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
                         });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("add", x, y);
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return tape.record("add", Tensor(x.shape(), std::move(out)), {a.id(), b.id()},
                     [](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (auto dst : p)
                         for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("sub", x, y);
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return tape.record("sub", Tensor(x.shape(), std::move(out)), {a.id(), b.id()},
                     [](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (std::size_t i = 0; i < p[0].size(); ++i) p[0][i] += g[i];
                       for (std::size_t i = 0; i < p[1].size(); ++i) p[1][i] -= g[i];
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor x = a.value();
  const Tensor y = b.value();
  require_same_shape("mul", x, y);
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return tape.record("mul", Tensor(x.shape(), std::move(out)), {a.id(), b.id()},
                     [x, y](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (std::size_t i = 0; i < p[0].size(); ++i) p[0][i] += g[i] * y[i];
                       for (std::size_t i = 0; i < p[1].size(); ++i) p[1][i] += g[i] * x[i];
                     });
}

Var add_n(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("add_n of nothing");
  Tape& tape = xs.front().tape();
  const Shape shape = xs.front().shape();
  std::vector<double> out(shape_numel(shape), 0.0);
  std::vector<std::size_t> parents;
  for (const auto& v : xs) {
    same_tape(xs.front(), v);
    require_same_shape("add_n", xs.front().value(), v.value());
    const auto& t = v.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
    parents.push_back(v.id());
  }
  return tape.record("add_n", Tensor(shape, std::move(out)), std::move(parents),
                     [](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (auto dst : p)
                         for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
                     });
}

Var add_row(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& r = b.value();
  if (x.rank() != 2 || r.rows() != 1 || r.cols() != x.cols()) {
    throw ShapeError("add_row: " + shape_string(x.shape()) + " + " + shape_string(r.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + r[j];
  return tape.record("add_row", Tensor(x.shape(), std::move(out)), {a.id(), b.id()},
                     [m, n](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (std::size_t i = 0; i < p[0].size(); ++i) p[0][i] += g[i];
                       if (!p[1].empty())
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) p[1][j] += g[i * n + j];
                     });
}

Var outer_sum(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& c = a.value();
  const Tensor& r = b.value();
  if (c.cols() != 1 || r.rows() != 1) {
    throw ShapeError("outer_sum: " + shape_string(c.shape()) + " (+) " + shape_string(r.shape()));
  }
  const std::size_t m = c.rows(), n = r.cols();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = c[i] + r[j];
  return tape.record("outer_sum", Tensor::matrix(m, n, std::move(out)), {a.id(), b.id()},
                     [m, n](std::span<const double> g, std::span<const std::span<double>> p) {
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j) {
                           if (!p[0].empty()) p[0][i] += g[i * n + j];
                           if (!p[1].empty()) p[1][j] += g[i * n + j];
                         }
                     });
}

Var scale(Var a, double c) {
  const Tensor& x = a.value();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x[i];
  return a.tape().record("scale", Tensor(x.shape(), std::move(out)), {a.id()},
                         [c](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < g.size(); ++i) p[0][i] += c * g[i];
                         });
}

Var shift(Var a, double c) {
  const Tensor& x = a.value();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + c;
  return a.tape().record("shift", Tensor(x.shape(), std::move(out)), {a.id()},
                         [](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < g.size(); ++i) p[0][i] += g[i];
                         });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols of nothing");
  Tape& tape = xs.front().tape();
  const std::size_t m = xs.front().value().rows();
  std::vector<std::size_t> widths, parents;
  std::size_t total = 0;
  for (const auto& v : xs) {
    same_tape(xs.front(), v);
    if (v.value().rows() != m) throw ShapeError("concat_cols: row count mismatch");
    widths.push_back(v.value().cols());
    parents.push_back(v.id());
    total += v.value().cols();
  }
  std::vector<double> out(m * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& t = xs[k].value();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + offset + j] = t[i * widths[k] + j];
    offset += widths[k];
  }
  return tape.record("concat_cols", Tensor::matrix(m, total, std::move(out)), std::move(parents),
                     [m, total, widths](std::span<const double> g, std::span<const std::span<double>> p) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (!p[k].empty())
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               p[k][i * widths[k] + j] += g[i * total + off + j];
                         off += widths[k];
                       }
                     });
}

Var concat_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("concat_rows of nothing");
  Tape& tape = xs.front().tape();
  const std::size_t n = xs.front().value().cols();
  std::vector<std::size_t> sizes, parents;
  std::vector<double> out;
  std::size_t rows = 0;
  for (const auto& v : xs) {
    same_tape(xs.front(), v);
    const auto& t = v.value();
    if (t.cols() != n) throw ShapeError("concat_rows: column count mismatch");
    out.insert(out.end(), t.data().begin(), t.data().end());
    sizes.push_back(t.numel());
    parents.push_back(v.id());
    rows += t.rows();
  }
  return tape.record("concat_rows", Tensor::matrix(rows, n, std::move(out)), std::move(parents),
                     [sizes](std::span<const double> g, std::span<const std::span<double>> p) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < sizes.size(); ++k) {
                         for (std::size_t i = 0; i < p[k].size(); ++i) p[k][i] += g[off + i];
                         off += sizes[k];
                       }
                     });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin >= end || end > x.cols()) throw ShapeError("slice_cols out of range");
  const std::size_t m = x.rows(), n = x.cols(), w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = x[i * n + begin + j];
  return a.tape().record("slice_cols", Tensor::matrix(m, w, std::move(out)), {a.id()},
                         [m, n, w, begin](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < w; ++j) p[0][i * n + begin + j] += g[i * w + j];
                         });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin >= end || end > x.rows()) throw ShapeError("slice_rows out of range");
  const std::size_t n = x.cols();
  return a.tape().record("slice_rows", x.row_slice(begin, end), {a.id()},
                         [n, begin](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < g.size(); ++i) p[0][begin * n + i] += g[i];
                         });
}

Var reshape(Var a, Shape shape) {
  return a.tape().record("reshape", a.value().reshaped(std::move(shape)), {a.id()},
                         [](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < g.size(); ++i) p[0][i] += g[i];
                         });
}

Var relu(Var a) {
  return unary_map(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a) {
  return unary_map(
      "leaky_relu", a, [](double x) { return x > 0.0 ? x : kLeakySlope * x; },
      [](double x, double) { return x > 0.0 ? 1.0 : kLeakySlope; });
}

Var sigmoid(Var a) {
  return unary_map(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary_map(
      "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary_map(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var expm1(Var a) {
  return unary_map(
      "expm1", a, [](double x) { return std::expm1(x); }, [](double, double y) { return y + 1.0; });
}

Var log(Var a) {
  return unary_map(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

namespace {

Var softmax_impl(std::string_view op, Var a, const Tensor* mask) {
  const Tensor& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.numel(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!mask || (*mask)[i * n + j] != 0.0) mx = std::max(mx, x[i * n + j]);
    if (!std::isfinite(mx)) throw ShapeError(std::string(op) + ": row " + std::to_string(i) + " fully masked");
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && (*mask)[i * n + j] == 0.0) continue;
      out[i * n + j] = std::exp(x[i * n + j] - mx);
      z += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
  }
  Tensor y(x.shape(), std::move(out));
  Tensor yout = y;
  return a.tape().record(op, std::move(y), {a.id()},
                         [yout, m, n](std::span<const double> g, std::span<const std::span<double>> p) {
                           for (std::size_t i = 0; i < m; ++i) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * yout[i * n + j];
                             for (std::size_t j = 0; j < n; ++j)
                               p[0][i * n + j] += yout[i * n + j] * (g[i * n + j] - dot);
                           }
                         });
}

}  // namespace

Var softmax_rows(Var a) { return softmax_impl("softmax_rows", a, nullptr); }

Var masked_softmax_rows(Var a, const Tensor& mask) {
  if (mask.shape() != a.shape()) throw ShapeError("masked_softmax_rows: mask shape mismatch");
  return softmax_impl("masked_softmax_rows", a, &mask);
}

Var l1_norm(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += std::abs(v);
  return reduce_scalar("l1_norm", a, s, [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var sum_squares(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v * v;
  return reduce_scalar("sum_squares", a, s, [](double x) { return 2.0 * x; });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return reduce_scalar("sum", a, s, [](double) { return 1.0; });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().numel());
  if (n == 0) throw ShapeError("mean of empty tensor");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return reduce_scalar("mean", a, s / n, [n](double) { return 1.0 / n; });
}

}  // namespace ops
}  // namespace mgadn
