#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stabench/config.hpp"

namespace stabench::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInputError = 1, kDegenerate = 2 };

struct MetricsArgs {
  fs::path pred_dir;
  fs::path gt_dir;
  fs::path out_csv;
  std::string model = "model";
  std::optional<int> num_classes;
};

struct AnalyzeArgs {
  std::vector<fs::path> scores;
  std::vector<std::string> protocols;  // defaults to the file stems
  std::optional<fs::path> out_json;
  std::optional<fs::path> plots_dir;
  std::string metric = "dice";
  std::string class_id = "macro";
  bool exact_friedman = false;
  bool paired_effects = false;
};

struct XaiArgs {
  fs::path image;
  fs::path probmap;
  fs::path pred;
  fs::path gt;
  fs::path out_dir;
  std::optional<int> num_classes;
  bool attention_from_gt = false;
};

struct XaiStabilityArgs {
  fs::path maps_dir;
  fs::path out_dir;
};

struct SweepArgs {
  std::optional<fs::path> space;
  std::string objective;  // builtin:<name>
  std::size_t budget = 30;
  std::size_t init_random = 5;
  std::size_t n_candidates = 512;
  fs::path out_csv;
};

struct SplitsArgs {
  std::size_t n = 0;
  std::size_t k = 0;  // 0 selects leave-one-out
  std::optional<fs::path> out_json;
};

struct ReportArgs {
  fs::path report_json;
  fs::path out_dir;
};

// Each command returns an exit code and throws stabench::Error on bad input.
int cmd_metrics(const MetricsArgs& args, const RunConfig& config, std::ostream& out);
int cmd_analyze(const AnalyzeArgs& args, const RunConfig& config, std::ostream& out, bool color = false);
int cmd_xai(const XaiArgs& args, const RunConfig& config, std::ostream& out);
int cmd_xai_stability(const XaiStabilityArgs& args, const RunConfig& config, std::ostream& out);
int cmd_sweep(const SweepArgs& args, const RunConfig& config, std::ostream& out);
int cmd_splits(const SplitsArgs& args, const RunConfig& config, std::ostream& out);
int cmd_report(const ReportArgs& args, const RunConfig& config, std::ostream& out);

// Sorted regular files of a directory, optionally filtered by extension.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension = {});

}  // namespace stabench::cli
