#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/forecast_head.hpp"
#include "mgadn/params.hpp"
#include "mgadn/shared_layer.hpp"
#include "mgadn/vae_head.hpp"

namespace mgadn {

// Architecture and ablation switches. Zero sizes select the defaults noted
// on each accessor.
struct ModelConfig {
  std::size_t n_sensors = 0;
  std::size_t window = 5;
  std::size_t top_k = 5;
  std::size_t embed_dim = 16;
  std::size_t latent = 0;
  std::size_t vae_hidden = 0;
  std::size_t mlp_hidden = 0;
  bool use_shared = true;
  bool use_pred = true;
  bool use_recon = true;

  std::size_t latent_size() const;      // max(2, N / 2)
  std::size_t vae_hidden_size() const;  // ceil(d * N / 2)
  std::size_t mlp_hidden_size() const;  // 2 * N
  void validate() const;
};

std::vector<ParamSpec> model_param_specs(const ModelConfig& config);

// Everything a forward pass needs, bound to one tape.
struct BoundModel {
  std::optional<SharedLayerParams> shared;
  std::optional<Var> embedding;
  std::optional<GatParams> gat;
  std::optional<VaeParams> vae;
};

struct WindowForward {
  Var z;                                // shared-layer output (or the raw window when bypassed)
  std::optional<Var> forecast;          // 1 x N
  std::optional<LatentSample> latent;
  std::optional<Var> reconstruction;    // d x N
};

class Model {
 public:
  Model(ModelConfig config, ParamStore params);
  static Model create(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  // Structure from the current embeddings; requires the forecast head.
  AdjacencyMask structure() const;

  BoundModel bind(Tape& tape) const;

  // Records the forward pass of one d x N window. `eps` selects the VAE
  // sample; nullptr means evaluation mode (eps = 0). Z is tagged `tag`.
  WindowForward forward(Tape& tape, const BoundModel& bound, const AdjacencyMask* mask, const Tensor& window,
                        const Tensor* eps, std::string_view tag = "Z") const;

  struct Prediction {
    Tensor forecast;        // 1 x N, empty without the forecast head
    Tensor reconstruction;  // d x N, empty without the VAE head
  };
  // Evaluation-mode outputs for each window; pure in (windows, params).
  std::vector<Prediction> infer(const std::vector<Tensor>& windows) const;

 private:
  ModelConfig config_;
  ParamStore params_;
};

}  // namespace mgadn
