#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stabench/analysis.hpp"
#include "stabench/stability.hpp"
#include "stabench/svg.hpp"

namespace stabench::report {

// Fixed output file names of the report command.
inline constexpr const char* kCdDiagramFile = "cd_diagram.svg";
inline constexpr const char* kForestFile = "forest.svg";
inline constexpr const char* kTrajectoryFile = "rank_trajectories.svg";
inline constexpr const char* kEffectGridFile = "effect_grid.svg";

// Rank axis over [1, k]; one labelled tick per model at its mean rank, one
// bar per clique of two or more models, and a ruler of length CD.
svg::Figure render_cd_diagram(const stability::FriedmanResult& friedman, const stability::NemenyiResult& nemenyi,
                              const std::string& title = "Critical difference");

// One row per model, sorted by mean descending (ties by name): whisker from
// lower to upper bound, diamond at the mean.
svg::Figure render_forest_plot(const std::vector<std::pair<std::string, stability::BootstrapCI>>& cis,
                               const std::string& title = "Bootstrap confidence intervals");

// One polyline per model over fold index; rank 1 at the top.
svg::Figure render_rank_trajectories(const std::map<std::string, std::vector<double>>& trajectories,
                                     const std::string& title = "Rank trajectories");

struct EffectCell {
  std::string model_a;
  std::string model_b;
  std::optional<stability::EffectSize> effect;  // empty: infinite effect
};

// Upper-triangular grid: cell (a, b) colored by magnitude and annotated with d.
svg::Figure render_effect_grid(const std::vector<std::string>& models, const std::vector<EffectCell>& cells,
                               const std::string& title = "Pairwise effect sizes");

std::string magnitude_color(stability::Magnitude m);
std::string model_color(std::size_t index);

struct RenderedReport {
  svg::Figure cd_diagram;
  svg::Figure forest;
  svg::Figure trajectories;
  svg::Figure effect_grid;
};

// All four figures, one stacked panel per protocol.
RenderedReport render_all(const analysis::StabilityReport& report);
void write_figures(const analysis::StabilityReport& report, const std::filesystem::path& out_dir);

}  // namespace stabench::report
