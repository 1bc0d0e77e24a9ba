#pragma once

#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/layers.hpp"
#include "mgadn/rng.hpp"

namespace mgadn {

// Encoder: flattened Z (1 x dN) -> ReLU hidden (H) -> mu, logvar (1 x L).
// Decoder: latent (1 x L) -> ReLU hidden (H) -> 1 x dN reshaped to d x N.
struct VaeParams {
  Linear encoder;
  Linear mu;
  Linear logvar;
  Linear decoder_hidden;
  Linear decoder_out;

  static VaeParams bind(Tape& tape, const ParamStore& store);
};

std::vector<ParamSpec> vae_head_specs(std::size_t flat_size, std::size_t hidden, std::size_t latent);

struct Posterior {
  Var mu;
  Var logvar;
};

struct LatentSample {
  Var mu;
  Var logvar;
  Tensor eps;
  Var z;  // mu + exp(logvar / 2) * eps
};

Posterior encode(Var z_shared, const VaeParams& params);

// eps must have the latent's shape. Pass zeros for evaluation (z = mu).
LatentSample reparameterize(Var mu, Var logvar, const Tensor& eps);
Tensor draw_eps(Rng& rng, std::size_t latent);

Var decode(Var z, const VaeParams& params, std::size_t d, std::size_t n);

// Sum over latent dimensions of 0.5 * (-logvar + mu^2 + exp(logvar) - 1).
Var kl_term(Var mu, Var logvar);

}  // namespace mgadn
