#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mgadn/tensor.hpp"

namespace mgadn {

// Parameter groups: shared layer, forecast head and reconstruction head.
enum class Partition { shared, pred, recon };

std::string_view partition_name(Partition p);
Partition partition_from_name(std::string_view name);

// Per-parameter gradients keyed by parameter name.
using GradMap = std::map<std::string, Tensor, std::less<>>;

// Trainable tensors, each owned by exactly one partition. Names are unique
// across the whole store, so a name identifies both tensor and partition.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  void add(Partition partition, std::string name, Tensor value);
  void set(std::string_view name, Tensor value);

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Partition partition_of(std::string_view name) const;
  bool has_partition(Partition p) const;

  // Insertion order, which is also the serialization order.
  std::vector<std::string> names() const;
  std::vector<std::string> names(Partition p) const;
  std::size_t size() const { return entries_.size(); }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const ParamStore& other) const;

 private:
  struct Entry {
    std::string name;
    Partition partition;
    Tensor value;
  };
  const Entry& entry(std::string_view name) const;

  std::uint64_t seed_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Declarative description of one parameter for init_params. A zero fan_in
// means the tensor starts at zero (biases); otherwise values are drawn
// uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
struct ParamSpec {
  Partition partition;
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::size_t fan_in;
};

ParamStore init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed);

}  // namespace mgadn
