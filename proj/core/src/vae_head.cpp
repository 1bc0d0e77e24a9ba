#include "mgadn/vae_head.hpp"

#include "mgadn/error.hpp"

namespace mgadn {

VaeParams VaeParams::bind(Tape& tape, const ParamStore& store) {
  return {Linear::bind(tape, store, "recon.enc"), Linear::bind(tape, store, "recon.mu"),
          Linear::bind(tape, store, "recon.logvar"), Linear::bind(tape, store, "recon.dec_hidden"),
          Linear::bind(tape, store, "recon.dec_out")};
}

std::vector<ParamSpec> vae_head_specs(std::size_t flat, std::size_t hidden, std::size_t latent) {
  std::vector<ParamSpec> specs;
  for (auto part : {Linear::specs(Partition::recon, "recon.enc", flat, hidden),
                    Linear::specs(Partition::recon, "recon.mu", hidden, latent),
                    Linear::specs(Partition::recon, "recon.logvar", hidden, latent),
                    Linear::specs(Partition::recon, "recon.dec_hidden", latent, hidden),
                    Linear::specs(Partition::recon, "recon.dec_out", hidden, flat)}) {
    specs.insert(specs.end(), part.begin(), part.end());
  }
  return specs;
}

Posterior encode(Var z_shared, const VaeParams& params) {
  const auto flat = z_shared.value().numel();
  if (params.encoder.weight.value().rows() != flat) {
    throw ShapeError("vae encode: input has " + std::to_string(flat) + " values, encoder expects " +
                     std::to_string(params.encoder.weight.value().rows()));
  }
  Var h = ops::relu(params.encoder(ops::reshape(z_shared, Shape{1, flat})));
  return {params.mu(h), params.logvar(h)};
}

LatentSample reparameterize(Var mu, Var logvar, const Tensor& eps) {
  if (mu.value().shape() != logvar.value().shape()) throw ShapeError("reparameterize: mu/logvar length mismatch");
  if (eps.numel() != mu.value().numel()) throw ShapeError("reparameterize: eps length mismatch");
  Tensor e = eps.reshaped(mu.value().shape());
  Var sigma = ops::exp(ops::scale(logvar, 0.5));
  Var z = ops::add(mu, ops::mul(sigma, mu.tape().constant(e)));
  return {mu, logvar, e, z};
}

Tensor draw_eps(Rng& rng, std::size_t latent) {
  std::vector<double> e(latent);
  for (auto& v : e) v = rng.normal();
  return Tensor::row(std::move(e));
}

Var decode(Var z, const VaeParams& params, std::size_t d, std::size_t n) {
  if (params.decoder_hidden.weight.value().rows() != z.value().numel()) throw ShapeError("vae decode: latent size mismatch");
  if (params.decoder_out.weight.value().cols() != d * n) throw ShapeError("vae decode: output size is not d * N");
  Var h = ops::relu(params.decoder_hidden(ops::reshape(z, Shape{1, z.value().numel()})));
  return ops::reshape(params.decoder_out(h), Shape{d, n});
}

Var kl_term(Var mu, Var logvar) {
  if (mu.value().shape() != logvar.value().shape()) throw ShapeError("kl_term: mu/logvar length mismatch");
  // exp(lv) - 1 - lv via expm1 keeps every term non-negative in floating point.
  Var inner = ops::add(ops::mul(mu, mu), ops::sub(ops::expm1(logvar), logvar));
  return ops::scale(ops::sum(inner), 0.5);
}

}  // namespace mgadn
