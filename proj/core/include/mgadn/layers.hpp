#pragma once

#include <string>
#include <vector>

#include "mgadn/autodiff.hpp"
#include "mgadn/params.hpp"

namespace mgadn {

// Affine map x W + b with W stored as (in x out) and b as (1 x out).
struct Linear {
  Var weight;
  Var bias;

  static Linear bind(Tape& tape, const ParamStore& store, const std::string& prefix);
  static std::vector<ParamSpec> specs(Partition partition, const std::string& prefix, std::size_t in,
                                      std::size_t out);
  Var operator()(Var x) const { return ops::add_row(ops::matmul(x, weight), bias); }
};

// Fully connected stack with ReLU between layers (none after the last).
struct Mlp {
  std::vector<Linear> layers;

  static Mlp bind(Tape& tape, const ParamStore& store, const std::string& prefix, std::size_t depth);
  // dims = {in, hidden..., out}
  static std::vector<ParamSpec> specs(Partition partition, const std::string& prefix,
                                      const std::vector<std::size_t>& dims);
  Var operator()(Var x) const;
};

}  // namespace mgadn
