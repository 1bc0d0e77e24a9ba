#include "mgadn/model.hpp"

#include <cmath>
#include <string>

#include "mgadn/error.hpp"
#include "mgadn/rng.hpp"

namespace mgadn {

std::size_t ModelConfig::latent_size() const { return latent ? latent : std::max<std::size_t>(2, n_sensors / 2); }

std::size_t ModelConfig::vae_hidden_size() const {
  return vae_hidden ? vae_hidden : (window * n_sensors + 1) / 2;
}

std::size_t ModelConfig::mlp_hidden_size() const { return mlp_hidden ? mlp_hidden : 2 * n_sensors; }

void ModelConfig::validate() const {
  if (n_sensors < 2) throw ConfigError("model needs at least 2 sensors");
  if (window < 1) throw ConfigError("window length must be positive");
  if (embed_dim < 1) throw ConfigError("embedding dimension must be positive");
  if (!use_pred && !use_recon) throw ConfigError("at least one head must remain enabled");
  if (use_pred && (top_k < 1 || top_k > n_sensors - 1)) {
    throw ConfigError("k=" + std::to_string(top_k) + " must lie in [1, " + std::to_string(n_sensors - 1) + "]");
  }
  if (use_recon && latent_size() >= window * n_sensors) {
    throw ConfigError("latent size must be smaller than d * N");
  }
}

std::vector<ParamSpec> model_param_specs(const ModelConfig& c) {
  std::vector<ParamSpec> specs;
  auto append = [&specs](std::vector<ParamSpec> more) { specs.insert(specs.end(), more.begin(), more.end()); };
  if (c.use_shared) append(shared_layer_specs(c.n_sensors));
  if (c.use_pred) append(forecast_head_specs(c.n_sensors, c.window, c.embed_dim, c.mlp_hidden_size()));
  if (c.use_recon) append(vae_head_specs(c.window * c.n_sensors, c.vae_hidden_size(), c.latent_size()));
  return specs;
}

Model::Model(ModelConfig config, ParamStore params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  for (const auto& s : model_param_specs(config_)) {
    if (!params_.contains(s.name)) throw ConfigError("parameter store is missing '" + s.name + "'");
    const auto& t = params_.get(s.name);
    if (t.rows() != s.rows || t.cols() != s.cols) throw ShapeError("parameter '" + s.name + "' has the wrong shape");
  }
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ParamStore store = init_params(model_param_specs(config), seed);
  if (config.use_pred) {
    // Redraw any embedding row that came out as the zero vector.
    const Tensor& emb = store.get("pred.embedding");
    std::vector<double> v = emb.storage();
    const std::size_t w = emb.cols();
    const double bound = 1.0 / std::sqrt(static_cast<double>(w));
    Rng jitter(seed ^ 0x9e3779b97f4a7c15ULL);
    bool changed = false;
    for (std::size_t i = 0; i < emb.rows(); ++i) {
      double norm = 0.0;
      for (std::size_t c = 0; c < w; ++c) norm += v[i * w + c] * v[i * w + c];
      while (norm == 0.0) {
        norm = 0.0;
        for (std::size_t c = 0; c < w; ++c) {
          v[i * w + c] = jitter.uniform(-bound, bound);
          norm += v[i * w + c] * v[i * w + c];
        }
        changed = true;
      }
    }
    if (changed) store.set("pred.embedding", Tensor::matrix(emb.rows(), w, std::move(v)));
  }
  return Model(config, std::move(store));
}

AdjacencyMask Model::structure() const {
  if (!config_.use_pred) throw ConfigError("model has no forecast head");
  return learn_structure(params_.get("pred.embedding"), config_.top_k);
}

BoundModel Model::bind(Tape& tape) const {
  BoundModel b;
  if (config_.use_shared) b.shared = SharedLayerParams::bind(tape, params_);
  if (config_.use_pred) {
    b.embedding = bind_embedding(tape, params_);
    b.gat = GatParams::bind(tape, params_);
  }
  if (config_.use_recon) b.vae = VaeParams::bind(tape, params_);
  return b;
}

WindowForward Model::forward(Tape& tape, const BoundModel& bound, const AdjacencyMask* mask, const Tensor& window,
                             const Tensor* eps, std::string_view tag) const {
  if (window.rows() != config_.window || window.cols() != config_.n_sensors) {
    throw ShapeError("window has shape " + shape_string(window.shape()) + ", model expects " +
                     std::to_string(config_.window) + "x" + std::to_string(config_.n_sensors));
  }
  WindowForward out;
  if (config_.use_shared) {
    out.z = shared_forward(tape.constant(window), *bound.shared, tag);
  } else {
    // Differentiable leaf so gradients with respect to Z stay defined.
    out.z = tape.variable(window);
    tape.tag(std::string(tag), out.z);
  }
  if (config_.use_pred) {
    if (!mask) throw ConfigError("forecast head needs an adjacency mask");
    auto gat = gat_forward(out.z, *bound.embedding, *mask, *bound.gat);
    out.forecast = predict(gat.z, *bound.embedding, bound.gat->f);
  }
  if (config_.use_recon) {
    auto post = encode(out.z, *bound.vae);
    const Tensor zeros = Tensor::zeros(Shape{1, config_.latent_size()});
    out.latent = reparameterize(post.mu, post.logvar, eps ? *eps : zeros);
    out.reconstruction = decode(out.latent->z, *bound.vae, config_.window, config_.n_sensors);
  }
  return out;
}

std::vector<Model::Prediction> Model::infer(const std::vector<Tensor>& windows) const {
  std::optional<AdjacencyMask> mask;
  if (config_.use_pred) mask = structure();
  std::vector<Prediction> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    Tape tape;
    auto bound = bind(tape);
    auto fw = forward(tape, bound, mask ? &*mask : nullptr, w, nullptr);
    Prediction p;
    if (fw.forecast) p.forecast = fw.forecast->value();
    if (fw.reconstruction) p.reconstruction = fw.reconstruction->value();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mgadn
