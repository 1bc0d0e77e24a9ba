#include "mgadn/checkpoint.hpp"

#include <json.hpp>

#include "mgadn/error.hpp"
#include "mgadn/io.hpp"

namespace mgadn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "mgadn-checkpoint";

json model_to_json(const ModelConfig& c) {
  return {{"n_sensors", c.n_sensors}, {"window", c.window},       {"top_k", c.top_k},
          {"embed_dim", c.embed_dim}, {"latent", c.latent},       {"vae_hidden", c.vae_hidden},
          {"mlp_hidden", c.mlp_hidden}, {"use_shared", c.use_shared}, {"use_pred", c.use_pred},
          {"use_recon", c.use_recon}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.n_sensors = j.at("n_sensors").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.top_k = j.at("top_k").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.latent = j.at("latent").get<std::size_t>();
  c.vae_hidden = j.at("vae_hidden").get<std::size_t>();
  c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  c.use_shared = j.at("use_shared").get<bool>();
  c.use_pred = j.at("use_pred").get<bool>();
  c.use_recon = j.at("use_recon").get<bool>();
  return c;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json partitions = json::object();
  for (auto p : {Partition::shared, Partition::pred, Partition::recon}) {
    if (!ckpt.params.has_partition(p)) continue;
    json list = json::array();
    for (const auto& name : ckpt.params.names(p)) {
      const auto& t = ckpt.params.get(name);
      list.push_back({{"name", name}, {"shape", t.shape()}, {"data", t.storage()}});
    }
    partitions[std::string(partition_name(p))] = std::move(list);
  }
  json j = {
      {"format", kFormat},
      {"version", Checkpoint::kVersion},
      {"model", model_to_json(ckpt.model)},
      {"seed", ckpt.params.seed()},
      {"sensor_names", ckpt.sensor_names},
      {"normalization", {{"min", ckpt.normalization.min}, {"max", ckpt.normalization.max}}},
      {"config", json::parse(ckpt.run_config_json)},
      {"partitions", std::move(partitions)},
  };
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kFormat) throw ParseError("not an mgadn checkpoint");
    const int version = j.at("version").get<int>();
    if (version < 1 || version > Checkpoint::kVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.model = model_from_json(j.at("model"));
    c.sensor_names = j.at("sensor_names").get<std::vector<std::string>>();
    c.normalization.min = j.at("normalization").at("min").get<std::vector<double>>();
    c.normalization.max = j.at("normalization").at("max").get<std::vector<double>>();
    c.run_config_json = j.at("config").dump();
    c.params = ParamStore(j.at("seed").get<std::uint64_t>());
    for (auto p : {Partition::shared, Partition::pred, Partition::recon}) {
      const auto key = std::string(partition_name(p));
      if (!j.at("partitions").contains(key)) continue;
      for (const auto& entry : j.at("partitions").at(key)) {
        c.params.add(p, entry.at("name").get<std::string>(),
                     Tensor(entry.at("shape").get<Shape>(), entry.at("data").get<std::vector<double>>()));
      }
    }
    if (c.sensor_names.size() != c.model.n_sensors) throw ParseError("checkpoint sensor names do not match the model");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  atomic_write(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace mgadn
