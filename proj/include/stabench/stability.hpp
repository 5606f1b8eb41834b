#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stabench/data_model.hpp"
#include "stabench/kernels.hpp"

namespace stabench::stability {

// ---------------------------------------------------------------------------
// Bootstrap confidence intervals
// ---------------------------------------------------------------------------

struct BootstrapCI {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
};

// Percentile bootstrap of the mean. Resample b draws its indices from the
// stream stream_seed(seed, b), so the result is independent of thread count.
// Bounds are the (1-level)/2 and (1+level)/2 linear-interpolation percentiles
// of the resample means, widened if needed to contain the sample mean.
BootstrapCI bootstrap_ci(std::span<const double> scores, double level = 0.95,
                         std::size_t n_resamples = 10000, std::uint64_t seed = 0,
                         kernels::Exec exec = kernels::Exec::parallel);

// Linear-interpolation percentile (q in [0, 1]) of ascending `sorted`.
double percentile(std::span<const double> sorted, double q);

// ---------------------------------------------------------------------------
// Ranks and the Friedman test
// ---------------------------------------------------------------------------

// Rank 1 = highest value; tied values share the average of their ranks.
std::vector<double> rank_descending(std::span<const double> values);

// Per-fold model ranks, ranks[fold][model].
std::vector<std::vector<double>> fold_ranks(const ScoreMatrix& matrix);

struct FriedmanResult {
  std::vector<std::string> models;
  std::vector<double> mean_ranks;  // aligned with models
  std::size_t n_folds = 0;
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool tie_corrected = false;
  bool degenerate = false;  // every fold fully tied
  std::optional<double> exact_p_value;

  std::map<std::string, double> mean_rank_map() const;
};

// Largest k * N for which the exact permutation p-value is enumerated.
inline constexpr std::size_t kExactFriedmanLimit = 12;

FriedmanResult friedman_test(const ScoreMatrix& matrix, bool exact = false);
FriedmanResult friedman_test(const ScoreTable& table, const std::string& metric,
                             const std::string& class_id, bool exact = false);

// Exact p-value of the (uncorrected) Friedman statistic under within-fold
// exchangeability, enumerating every distinct within-fold permutation of the
// observed ranks.
double friedman_exact_p(const std::vector<std::vector<double>>& ranks);

// ---------------------------------------------------------------------------
// Nemenyi post-hoc test
// ---------------------------------------------------------------------------

// Studentized-range critical value divided by sqrt(2), infinite dof.
double q_alpha(int k, double alpha);

// CD = q_alpha * sqrt(k (k + 1) / (6 N)).
double nemenyi_cd(int k, std::size_t n_folds, double alpha = 0.05);

using Clique = std::vector<std::string>;

// Maximal runs of models, contiguous in rank order, whose rank spread is <= cd.
std::vector<Clique> cd_cliques(const std::map<std::string, double>& mean_ranks, double cd);

struct NemenyiResult {
  double critical_difference = 0.0;
  double alpha = 0.05;
  double q_alpha = 0.0;
  std::map<std::pair<std::string, std::string>, bool> pairwise_significant;  // key ordered a < b
  std::vector<Clique> cliques;
};

NemenyiResult nemenyi(const FriedmanResult& friedman, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Effect size and rank analytics
// ---------------------------------------------------------------------------

enum class Magnitude { negligible, small, medium, large };
std::string_view to_string(Magnitude m);
Magnitude magnitude_from_string(std::string_view s);
// Thresholds 0.2 / 0.5 / 0.8 on |d|, each inclusive upward.
Magnitude magnitude_of(double d);

struct EffectSize {
  double cohens_d = 0.0;
  Magnitude magnitude = Magnitude::negligible;
};

enum class EffectVariant {
  independent,  // pooled sample standard deviation of the two groups
  paired,       // mean difference over standard deviation of differences
};

EffectSize cohens_d(std::span<const double> a, std::span<const double> b,
                    EffectVariant variant = EffectVariant::independent);

struct RankStats {
  double mean_rank = 0.0;
  double range = 0.0;
  double std = 0.0;  // sample standard deviation
  double top1_pct = 0.0;
  double top2_pct = 0.0;
  std::vector<double> trajectory;
};

RankStats rank_stats(std::span<const double> trajectory);

// Spearman correlation of two equal-length samples (average ranks on ties).
double spearman(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Winner and range analysis across protocols
// ---------------------------------------------------------------------------

struct SliceInstability {
  std::string protocol;
  std::string metric;
  std::string class_id;
  std::string winner;
  double winner_mean = 0.0;
  std::vector<std::string> tied_winners;  // other models sharing the top mean
  std::string highest_model;
  double highest = 0.0;
  std::string lowest_model;
  double lowest = 0.0;
  double range = 0.0;
};

struct WinnerFlip {
  std::string metric;
  std::string class_id;
  std::vector<std::pair<std::string, std::string>> winners;  // (protocol, winner)
  bool flipped = false;
};

struct InstabilityReport {
  std::vector<SliceInstability> slices;
  std::vector<WinnerFlip> flips;
};

using ProtocolTables = std::vector<std::pair<std::string, ScoreTable>>;

// Empty `metrics` means every metric present in the tables.
InstabilityReport instability_table(const ProtocolTables& tables, const std::vector<std::string>& metrics = {});

}  // namespace stabench::stability
