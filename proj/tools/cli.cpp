#include "cli.hpp"

#include <cstdlib>
#include <functional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <unistd.h>

#include "commands.hpp"
#include "stabench/error.hpp"

namespace stabench::cli {

namespace {

struct CommonFlags {
  std::optional<fs::path> config;
  ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration; flags override its values")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.overrides.seed, "Master seed (default 0)");
  cmd->add_option("--level", f.overrides.level, "Bootstrap confidence level (default 0.95)");
  cmd->add_option("--n-resamples", f.overrides.n_resamples, "Bootstrap resamples (default 10000)");
  cmd->add_option("--alpha", f.overrides.alpha, "Nemenyi significance level, 0.05 or 0.10 (default 0.05)");
  cmd->add_option("--foreground", f.overrides.foreground_classes, "Foreground class ids (default 1 2 3)");
  cmd->add_option("--xai-weights", f.overrides.xai_weights,
                  "Five layer weights: error uncertainty morphology attention saliency (default 0.2 each)")
      ->expected(5);
}

bool use_color() {
  const char* no_color = std::getenv("NO_COLOR");
  return (no_color == nullptr || *no_color == '\0') && isatty(STDOUT_FILENO);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability benchmarking for segmentation model comparisons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stabench 1.0.0");
  CommonFlags common;
  std::function<int(const RunConfig&)> action;

  MetricsArgs m;
  auto* metrics = app.add_subcommand("metrics", "Per-class and macro Dice/IoU for matching mask files");
  metrics->add_option("--pred", m.pred_dir, "Directory of predicted masks")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--gt", m.gt_dir, "Directory of ground-truth masks with the same file names")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics->add_option("--out", m.out_csv, "Output score table CSV")->required();
  metrics->add_option("--model", m.model, "Model name written to every row (default model)");
  metrics->add_option("--num-classes", m.num_classes, "Class count K including background (default 4)");
  add_common(metrics, common);
  metrics->callback([&] { action = [&](const RunConfig& c) { return cmd_metrics(m, c, out); }; });

  AnalyzeArgs a;
  auto* analyze = app.add_subcommand("analyze", "Bootstrap CIs, Friedman/Nemenyi, effect sizes and winner flips");
  analyze->add_option("--scores", a.scores, "Score table CSVs, one per protocol")->required()->check(CLI::ExistingFile);
  analyze->add_option("--protocol", a.protocols, "Protocol label per score table (default file stem)");
  analyze->add_option("--out", a.out_json, "Report JSON output");
  analyze->add_option("--plots", a.plots_dir, "Directory for SVG figures");
  analyze->add_option("--metric", a.metric, "Metric to analyze (default dice)");
  analyze->add_option("--class", a.class_id, "Class to analyze (default macro)");
  analyze->add_flag("--exact", a.exact_friedman, "Exact permutation p-value for small Friedman designs");
  analyze->add_flag("--paired", a.paired_effects, "Paired Cohen's d over fold differences");
  add_common(analyze, common);
  analyze->callback([&] { action = [&](const RunConfig& c) { return cmd_analyze(a, c, out, use_color()); }; });

  XaiArgs x;
  std::string attention = "pred";
  auto* xai = app.add_subcommand("xai", "Five explanation layers and their composite for one image");
  xai->add_option("--image", x.image, "Grayscale or RGB PNG")->required()->check(CLI::ExistingFile);
  xai->add_option("--probmap", x.probmap, "Softmax probabilities (.pmap)")->required()->check(CLI::ExistingFile);
  xai->add_option("--pred", x.pred, "Predicted label mask")->required()->check(CLI::ExistingFile);
  xai->add_option("--gt", x.gt, "Ground-truth label mask")->required()->check(CLI::ExistingFile);
  xai->add_option("--out-dir", x.out_dir, "Output directory for layer PNGs and summary.json")->required();
  xai->add_option("--num-classes", x.num_classes, "Class count K (default from the probability map)");
  xai->add_option("--attention-masks", attention, "Class masks for the attention layer: pred or gt (default pred)")
      ->check(CLI::IsMember({"pred", "gt"}));
  add_common(xai, common);
  xai->callback([&] {
    x.attention_from_gt = attention == "gt";
    action = [&](const RunConfig& c) { return cmd_xai(x, c, out); };
  });

  XaiStabilityArgs s;
  auto* xs = app.add_subcommand("xai-stability", "Per-pixel mean and variance of uncertainty maps across folds");
  xs->add_option("--maps", s.maps_dir, "Directory of per-fold .pmap files")->required()->check(CLI::ExistingDirectory);
  xs->add_option("--out-dir", s.out_dir, "Output directory")->required();
  add_common(xs, common);
  xs->callback([&] { action = [&](const RunConfig& c) { return cmd_xai_stability(s, c, out); }; });

  SweepArgs w;
  auto* sweep = app.add_subcommand("sweep", "Bayesian optimization sweep over a built-in objective");
  sweep->add_option("--space", w.space, "Search space JSON (default the objective's own space)")
      ->check(CLI::ExistingFile);
  sweep->add_option("--objective", w.objective, "builtin:quadratic1d|branin2d|noisy-step|simulated-fold-score")
      ->required();
  sweep->add_option("--budget", w.budget, "Total trials (default 30)");
  sweep->add_option("--init", w.init_random, "Random initial trials (default 5)");
  sweep->add_option("--candidates", w.n_candidates, "Random candidates scored by EI per step (default 512)");
  sweep->add_option("--out", w.out_csv, "Trials CSV, rewritten after every trial")->required();
  add_common(sweep, common);
  sweep->callback([&] { action = [&](const RunConfig& c) { return cmd_sweep(w, c, out); }; });

  SplitsArgs p;
  auto* sp = app.add_subcommand("splits", "Leave-one-out or seeded k-fold split plan as JSON");
  sp->add_option("--n", p.n, "Number of samples")->required();
  sp->add_option("--k", p.k, "Number of folds; omit for leave-one-out");
  sp->add_option("--out", p.out_json, "Output JSON (default stdout)");
  add_common(sp, common);
  sp->callback([&] { action = [&](const RunConfig& c) { return cmd_splits(p, c, out); }; });

  ReportArgs r;
  auto* rep = app.add_subcommand("report", "Render SVG figures from a report JSON");
  rep->add_option("--report", r.report_json, "Report JSON written by analyze")->required()->check(CLI::ExistingFile);
  rep->add_option("--out-dir", r.out_dir, "Output directory")->required();
  add_common(rep, common);
  rep->callback([&] { action = [&](const RunConfig& c) { return cmd_report(r, c, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  try {
    const auto config = resolve_config(common.config, common.overrides);
    return action(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace stabench::cli
