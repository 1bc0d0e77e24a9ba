#include "mgadn/params.hpp"

#include <cmath>

#include "mgadn/error.hpp"
#include "mgadn/rng.hpp"

namespace mgadn {

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::shared: return "shared";
    case Partition::pred: return "pred";
    case Partition::recon: return "recon";
  }
  return "unknown";
}

Partition partition_from_name(std::string_view name) {
  if (name == "shared") return Partition::shared;
  if (name == "pred") return Partition::pred;
  if (name == "recon") return Partition::recon;
  throw ParseError("unknown partition '" + std::string(name) + "'");
}

void ParamStore::add(Partition partition, std::string name, Tensor value) {
  if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), partition, std::move(value)});
}

const ParamStore::Entry& ParamStore::entry(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second];
}

void ParamStore::set(std::string_view name, Tensor value) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  auto& e = entries_[it->second];
  if (e.value.shape() != value.shape()) {
    throw ShapeError("parameter '" + e.name + "' has shape " + shape_string(e.value.shape()) +
                     ", got " + shape_string(value.shape()));
  }
  e.value = std::move(value);
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParamStore::get(std::string_view name) const { return entry(name).value; }

Partition ParamStore::partition_of(std::string_view name) const { return entry(name).partition; }

bool ParamStore::has_partition(Partition p) const {
  for (const auto& e : entries_)
    if (e.partition == p) return true;
  return false;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::vector<std::string> ParamStore::names(Partition p) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.partition == p) out.push_back(e.name);
  return out;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (seed_ != other.seed_ || entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.partition != b.partition || !(a.value == b.value)) return false;
  }
  return true;
}

ParamStore init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed) {
  ParamStore store(seed);
  Rng rng(seed);
  for (const auto& s : specs) {
    if (s.rows == 0 || s.cols == 0) {
      throw ConfigError("parameter '" + s.name + "' has a zero dimension");
    }
    std::vector<double> data(s.rows * s.cols, 0.0);
    if (s.fan_in > 0) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
      for (auto& v : data) v = rng.uniform(-bound, bound);
    }
    store.add(s.partition, s.name, Tensor::matrix(s.rows, s.cols, std::move(data)));
  }
  return store;
}

}  // namespace mgadn
