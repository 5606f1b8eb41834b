#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabench/stability.hpp"

namespace stabench::analysis {

using Json = nlohmann::ordered_json;

struct AnalysisOptions {
  std::string metric = "dice";
  std::string class_id = "macro";
  double level = 0.95;
  std::size_t n_resamples = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  bool exact_friedman = false;
  stability::EffectVariant effect_variant = stability::EffectVariant::independent;
};

struct ModelCI {
  std::string protocol;
  std::string model;
  stability::BootstrapCI ci;
};

struct ProtocolRanking {
  std::string protocol;
  std::optional<stability::FriedmanResult> friedman;
  std::optional<stability::NemenyiResult> nemenyi;
  std::string note;  // why a test was skipped, if it was
  std::optional<double> mean_fold_spearman;
};

struct PairEffect {
  std::string protocol;
  std::string model_a;
  std::string model_b;
  std::optional<stability::EffectSize> effect;  // empty when the effect is infinite
  std::string note;
};

struct ModelRanks {
  std::string protocol;
  std::string model;
  stability::RankStats stats;
};

struct StabilityReport {
  AnalysisOptions options;
  std::vector<ModelCI> cis;
  std::vector<ProtocolRanking> rankings;
  std::vector<PairEffect> effects;
  std::vector<ModelRanks> rank_stats;
  stability::InstabilityReport instability;
  std::vector<std::string> warnings;

  // True when some Friedman test saw fully tied folds.
  bool degenerate() const;
};

// Bootstrap seed of one (protocol, model) cell, derived from the run seed.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& protocol, const std::string& model);

// Full stability analysis of the (metric, class) slice of every protocol's
// table, plus the winner/range analysis over all slices.
StabilityReport analyze(const stability::ProtocolTables& tables, const AnalysisOptions& options = {});

Json to_json(const StabilityReport& report);
StabilityReport report_from_json(const Json& j);

}  // namespace stabench::analysis
