#include "mgadn/mtl.hpp"

#include <algorithm>
#include <cmath>

#include "mgadn/error.hpp"

namespace mgadn {

bool operator==(const LossPair& a, const LossPair& b) { return a.l_pred == b.l_pred && a.l_recon == b.l_recon; }

Var loss_pred(Var forecast, const Tensor& target) {
  if (forecast.value().numel() != target.numel()) throw ShapeError("loss_pred: length mismatch");
  Var t = forecast.tape().constant(target.reshaped(forecast.value().shape()));
  return ops::sum_squares(ops::sub(forecast, t));
}

Var loss_recon(Var reconstruction, const Tensor& window, Var mu, Var logvar) {
  if (reconstruction.value().shape() != window.shape()) throw ShapeError("loss_recon: window shape mismatch");
  Var w = reconstruction.tape().constant(window);
  return ops::add(kl_term(mu, logvar), ops::l1_norm(ops::sub(reconstruction, w)));
}

Var batch_mean(const std::vector<Var>& losses) {
  if (losses.empty()) throw ShapeError("batch_mean of no windows");
  return ops::scale(ops::add_n(losses), 1.0 / static_cast<double>(losses.size()));
}

double mgda_alpha(std::span<const double> g_pred, std::span<const double> g_recon) {
  if (g_pred.size() != g_recon.size()) throw ShapeError("mgda_alpha: gradient lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g_pred.size(); ++i) {
    if (!std::isfinite(g_pred[i]) || !std::isfinite(g_recon[i])) throw NumericError("mgda_alpha: non-finite gradient");
    const double diff = g_recon[i] - g_pred[i];
    num += diff * g_recon[i];
    den += diff * diff;
  }
  if (den < 1e-12) return 0.5;
  return std::clamp(num / den, 0.0, 1.0);
}

double mgda_alpha(const GradPair& g) { return mgda_alpha(g.g_pred, g.g_recon); }

bool pareto_dominates(const LossPair& a, const LossPair& b) {
  return a.l_pred <= b.l_pred && a.l_recon <= b.l_recon && !(a == b);
}

CombinationMode CombinationMode::fixed(double c_pred, double c_recon) {
  CombinationMode m;
  m.kind = Kind::fixed;
  m.c_pred = c_pred;
  m.c_recon = c_recon;
  m.validate();
  return m;
}

CombinationMode CombinationMode::alternating(std::size_t period) {
  CombinationMode m;
  m.kind = Kind::alternating;
  m.period = period;
  m.validate();
  return m;
}

void CombinationMode::validate() const {
  if (kind == Kind::fixed &&
      (c_pred < 0.0 || c_recon < 0.0 || std::abs(c_pred + c_recon - 1.0) > 1e-12)) {
    throw ConfigError("fixed weights must be non-negative and sum to 1");
  }
  if (kind == Kind::alternating && period == 0) throw ConfigError("alternating period must be positive");
}

std::string to_string(CombinationMode::Kind kind) {
  switch (kind) {
    case CombinationMode::Kind::mgda_ub: return "mgda_ub";
    case CombinationMode::Kind::fixed: return "fixed";
    case CombinationMode::Kind::alternating: return "alternating";
  }
  return "unknown";
}

CombinationMode::Kind combination_kind_from_string(std::string_view name) {
  if (name == "mgda_ub" || name == "mgda") return CombinationMode::Kind::mgda_ub;
  if (name == "fixed") return CombinationMode::Kind::fixed;
  if (name == "alternating" || name == "alt") return CombinationMode::Kind::alternating;
  throw ConfigError("unknown combination mode '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(ParamStore& params, const GradMap& grads, const std::optional<std::vector<Partition>>& only) {
  const auto& o = options_;
  for (const auto& [name, grad] : grads) {
    if (only && std::find(only->begin(), only->end(), params.partition_of(name)) == only->end()) continue;
    const Tensor& p = params.get(name);
    if (grad.shape() != p.shape()) {
      throw ShapeError("adam: gradient for '" + name + "' has shape " + shape_string(grad.shape()));
    }
    auto& mo = moments_[name];
    if (mo.m.empty()) {
      mo.m.assign(p.numel(), 0.0);
      mo.v.assign(p.numel(), 0.0);
    }
    ++mo.t;
    const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(mo.t));
    const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(mo.t));
    std::vector<double> next = p.storage();
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double g = grad[i];
      mo.m[i] = o.beta1 * mo.m[i] + (1.0 - o.beta1) * g;
      mo.v[i] = o.beta2 * mo.v[i] + (1.0 - o.beta2) * g * g;
      const double m_hat = mo.m[i] / bc1;
      const double v_hat = mo.v[i] / bc2;
      next[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
    params.set(name, Tensor(p.shape(), std::move(next)));
  }
}

std::uint64_t Adam::steps(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? 0 : it->second.t;
}

// ---------------------------------------------------------------------------
// Combined step

namespace {

std::vector<double> mean_tag_gradient(const Gradients& grads, std::size_t count) {
  std::vector<double> acc;
  for (std::size_t b = 0; b < count; ++b) {
    Tensor g = grads.at_tag("Z#" + std::to_string(b));
    if (acc.empty()) acc.assign(g.numel(), 0.0);
    for (std::size_t i = 0; i < g.numel(); ++i) acc[i] += g[i];
  }
  for (auto& v : acc) v /= static_cast<double>(count);
  return acc;
}

}  // namespace

StepResult combined_step(Model& model, std::span<const Window* const> batch, const CombinationMode& mode, Adam& adam,
                         Rng& rng, std::size_t epoch) {
  if (batch.empty()) throw ConfigError("combined_step needs a nonempty batch");
  mode.validate();
  const auto& cfg = model.config();

  Tape tape;
  const auto bound = model.bind(tape);
  std::optional<AdjacencyMask> mask;
  if (cfg.use_pred) mask = model.structure();

  std::vector<Var> pred_losses, recon_losses;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Window& w = *batch[b];
    std::optional<Tensor> eps;
    if (cfg.use_recon) eps = draw_eps(rng, cfg.latent_size());
    auto fw = model.forward(tape, bound, mask ? &*mask : nullptr, w.x, eps ? &*eps : nullptr, "Z#" + std::to_string(b));
    if (fw.forecast) pred_losses.push_back(loss_pred(*fw.forecast, w.target));
    if (fw.reconstruction) recon_losses.push_back(loss_recon(*fw.reconstruction, w.x, fw.latent->mu, fw.latent->logvar));
  }

  StepResult result;
  std::optional<Var> l_pred, l_recon;
  if (!pred_losses.empty()) {
    l_pred = batch_mean(pred_losses);
    result.losses.l_pred = l_pred->value().item();
  }
  if (!recon_losses.empty()) {
    l_recon = batch_mean(recon_losses);
    result.losses.l_recon = l_recon->value().item();
  }

  std::optional<std::vector<Partition>> partitions;
  Var total;
  if (l_pred && l_recon) {
    switch (mode.kind) {
      case CombinationMode::Kind::mgda_ub: {
        result.z_grads.g_pred = mean_tag_gradient(tape.backward(*l_pred), batch.size());
        result.z_grads.g_recon = mean_tag_gradient(tape.backward(*l_recon), batch.size());
        result.alpha = mgda_alpha(result.z_grads);
        break;
      }
      case CombinationMode::Kind::fixed:
        result.alpha = mode.c_pred;
        break;
      case CombinationMode::Kind::alternating: {
        const bool pred_turn = (epoch / mode.period) % 2 == 0;
        result.alpha = pred_turn ? 1.0 : 0.0;
        partitions = std::vector<Partition>{Partition::shared, pred_turn ? Partition::pred : Partition::recon};
        break;
      }
    }
    if (mode.kind == CombinationMode::Kind::alternating) {
      total = result.alpha == 1.0 ? *l_pred : *l_recon;
    } else {
      const double c_recon = mode.kind == CombinationMode::Kind::fixed ? mode.c_recon : 1.0 - result.alpha;
      total = ops::add(ops::scale(*l_pred, result.alpha), ops::scale(*l_recon, c_recon));
    }
  } else if (l_pred) {
    result.alpha = 1.0;
    total = *l_pred;
  } else {
    result.alpha = 0.0;
    total = *l_recon;
  }

  adam.step(model.params(), tape.backward(total).params(model.params()), partitions);
  return result;
}

}  // namespace mgadn
