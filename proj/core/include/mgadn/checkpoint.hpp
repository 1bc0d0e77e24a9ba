#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgadn/data.hpp"
#include "mgadn/model.hpp"
#include "mgadn/params.hpp"

namespace mgadn {

// Self-describing JSON archive: format tag, version, model architecture,
// normalization stats, sensor names, a verbatim echo of the run
// configuration, and every parameter grouped by partition.
struct Checkpoint {
  static constexpr int kVersion = 1;

  ModelConfig model;
  ParamStore params;
  NormalizationStats normalization;
  std::vector<std::string> sensor_names;
  std::string run_config_json = "{}";
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Rejects other formats and versions newer than kVersion.
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mgadn
