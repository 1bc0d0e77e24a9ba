#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/data.hpp"
#include "mgadn/model.hpp"
#include "mgadn/rng.hpp"

namespace mgadn {

struct LossPair {
  double l_pred = 0.0;
  double l_recon = 0.0;
};

bool operator==(const LossPair& a, const LossPair& b);

// Gradients of the two task losses with respect to the shared output Z,
// flattened to equal-length vectors.
struct GradPair {
  std::vector<double> g_pred;
  std::vector<double> g_recon;
};

// Per-window forecast loss ||forecast - target||_2^2.
Var loss_pred(Var forecast, const Tensor& target);
// Per-window reconstruction loss KL(mu, logvar) + |reconstruction - window|_1.
Var loss_recon(Var reconstruction, const Tensor& window, Var mu, Var logvar);
// Mean of per-window scalar losses.
Var batch_mean(const std::vector<Var>& losses);

// Closed-form minimiser over alpha in [0, 1] of
// ||alpha * g_pred + (1 - alpha) * g_recon||^2. Returns 0.5 when the two
// gradients coincide (squared distance below 1e-12).
double mgda_alpha(std::span<const double> g_pred, std::span<const double> g_recon);
double mgda_alpha(const GradPair& g);

// a dominates b: no worse in both losses and different in at least one.
bool pareto_dominates(const LossPair& a, const LossPair& b);

struct CombinationMode {
  enum class Kind { mgda_ub, fixed, alternating };

  Kind kind = Kind::mgda_ub;
  double c_pred = 0.5;  // fixed only
  double c_recon = 0.5;
  std::size_t period = 1;  // alternating: epochs per head

  static CombinationMode mgda_ub() { return {}; }
  static CombinationMode fixed(double c_pred, double c_recon);
  static CombinationMode alternating(std::size_t period = 1);
  void validate() const;
};

std::string to_string(CombinationMode::Kind kind);
CombinationMode::Kind combination_kind_from_string(std::string_view name);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moments and step counts are kept per parameter so a
// partition that sits out a step (alternating training) resumes cleanly.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // Updates the parameters named in `grads`; `only`, when set, restricts
  // the update to those partitions.
  void step(ParamStore& params, const GradMap& grads,
            const std::optional<std::vector<Partition>>& only = std::nullopt);

  const AdamOptions& options() const { return options_; }
  std::uint64_t steps(const std::string& name) const;

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
  };
  AdamOptions options_;
  std::map<std::string, Moments, std::less<>> moments_;
};

struct StepResult {
  LossPair losses;
  double alpha = 0.5;
  GradPair z_grads;  // filled in mgda_ub mode when both heads are present
};

// One optimisation step on `batch`. In mgda_ub mode the shared output of
// every window is tagged, each loss is differentiated with respect to it,
// the per-window gradients are averaged, alpha comes from mgda_alpha and
// alpha * L_pred + (1 - alpha) * L_recon is back-propagated through all
// partitions. `epoch` drives the alternating schedule.
StepResult combined_step(Model& model, std::span<const Window* const> batch, const CombinationMode& mode, Adam& adam,
                         Rng& rng, std::size_t epoch);

}  // namespace mgadn
