#include "stabench/config.hpp"

#include <fmt/format.h>

#include "stabench/error.hpp"
#include "stabench/io.hpp"

namespace stabench {

namespace {

XaiWeights weights_from(const std::vector<double>& v) {
  if (v.size() != 5) throw Error(fmt::format("xai_weights needs 5 values, got {}", v.size()));
  XaiWeights w;
  std::copy(v.begin(), v.end(), w.alphas.begin());
  return w;
}

}  // namespace

void RunConfig::validate() const {
  if (!(level > 0.0 && level < 1.0)) throw Error("level must lie in (0, 1)");
  if (n_resamples == 0) throw Error("n_resamples must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (foreground_classes.empty()) throw Error("foreground_classes must not be empty");
  for (int c : foreground_classes) {
    if (c < 0) throw Error("foreground class ids must be non-negative");
  }
  xai_weights.validate();
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig base) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "level") base.level = value.get<double>();
      else if (key == "n_resamples") base.n_resamples = value.get<std::size_t>();
      else if (key == "alpha") base.alpha = value.get<double>();
      else if (key == "foreground_classes") base.foreground_classes = value.get<std::vector<int>>();
      else if (key == "xai_weights") base.xai_weights = weights_from(value.get<std::vector<double>>());
      else throw Error(fmt::format("unknown config key '{}'", key));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("bad config value: {}", e.what()));
  }
  base.validate();
  return base;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["level"] = c.level;
  j["n_resamples"] = c.n_resamples;
  j["alpha"] = c.alpha;
  j["foreground_classes"] = c.foreground_classes;
  j["xai_weights"] = std::vector<double>(c.xai_weights.alphas.begin(), c.xai_weights.alphas.end());
  return j;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags) {
  RunConfig c;
  if (file) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(*file));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(fmt::format("{}: {}", file->string(), e.what()));
    }
    c = config_from_json(j, c);
  }
  if (flags.seed) c.seed = *flags.seed;
  if (flags.level) c.level = *flags.level;
  if (flags.n_resamples) c.n_resamples = *flags.n_resamples;
  if (flags.alpha) c.alpha = *flags.alpha;
  if (flags.foreground_classes) c.foreground_classes = *flags.foreground_classes;
  if (flags.xai_weights) c.xai_weights = weights_from(*flags.xai_weights);
  c.validate();
  return c;
}

}  // namespace stabench
