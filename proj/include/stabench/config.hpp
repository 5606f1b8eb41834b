#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "stabench/data_model.hpp"

namespace stabench {

struct RunConfig {
  std::uint64_t seed = 0;
  double level = 0.95;
  std::size_t n_resamples = 10000;
  double alpha = 0.05;
  std::vector<int> foreground_classes{1, 2, 3};
  XaiWeights xai_weights{};

  void validate() const;
};

// Values set on the command line. Unset fields fall through to the file, then defaults.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  std::optional<std::size_t> n_resamples;
  std::optional<double> alpha;
  std::optional<std::vector<int>> foreground_classes;
  std::optional<std::vector<double>> xai_weights;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::ordered_json config_to_json(const RunConfig& c);

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags);

}  // namespace stabench
