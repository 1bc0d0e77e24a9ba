#include "mgadn/layers.hpp"

namespace mgadn {

Linear Linear::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return Linear{tape.parameter(store, prefix + ".w"), tape.parameter(store, prefix + ".b")};
}

std::vector<ParamSpec> Linear::specs(Partition partition, const std::string& prefix, std::size_t in,
                                     std::size_t out) {
  return {{partition, prefix + ".w", in, out, in}, {partition, prefix + ".b", 1, out, 0}};
}

Mlp Mlp::bind(Tape& tape, const ParamStore& store, const std::string& prefix, std::size_t depth) {
  Mlp m;
  for (std::size_t i = 0; i < depth; ++i) m.layers.push_back(Linear::bind(tape, store, prefix + "." + std::to_string(i)));
  return m;
}

std::vector<ParamSpec> Mlp::specs(Partition partition, const std::string& prefix,
                                  const std::vector<std::size_t>& dims) {
  std::vector<ParamSpec> out;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    auto s = Linear::specs(partition, prefix + "." + std::to_string(i), dims[i], dims[i + 1]);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

Var Mlp::operator()(Var x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](x);
    if (i + 1 < layers.size()) x = ops::relu(x);
  }
  return x;
}

}  // namespace mgadn
