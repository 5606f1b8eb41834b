#include "commands.hpp"

#include <algorithm>
#include <set>

#include <fmt/color.h>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "stabench/analysis.hpp"
#include "stabench/error.hpp"
#include "stabench/hpo.hpp"
#include "stabench/io.hpp"
#include "stabench/metrics.hpp"
#include "stabench/report.hpp"
#include "stabench/splits.hpp"
#include "stabench/xai.hpp"

namespace stabench::cli {

namespace {

using Json = nlohmann::ordered_json;

Json summary_json(const std::vector<double>& values) {
  const auto s = xai::summarize(values);
  Json j;
  j["min"] = s.min;
  j["max"] = s.max;
  j["mean"] = s.mean;
  return j;
}

void write_layer(const fs::path& dir, const xai::ExplanationMap& m) {
  io::write_gray_png(dir / fmt::format("{}.png", xai::to_string(m.layer)), m.height, m.width, m.values);
}

}  // namespace

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("{}: not a directory", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (!extension.empty() && entry.path().extension() != extension) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_metrics(const MetricsArgs& args, const RunConfig& config, std::ostream& out) {
  const auto preds = list_files(args.pred_dir);
  const auto gts = list_files(args.gt_dir);
  if (preds.empty() && gts.empty()) throw Error("no mask pairs");
  std::set<std::string> gt_names;
  for (const auto& p : gts) gt_names.insert(p.filename().string());
  for (const auto& p : preds) {
    if (!gt_names.erase(p.filename().string())) {
      throw Error(fmt::format("unmatched filename: {} has no ground truth", p.filename().string()));
    }
  }
  if (!gt_names.empty()) throw Error(fmt::format("unmatched filename: {} has no prediction", *gt_names.begin()));

  const int k = args.num_classes.value_or(kDefaultNumClasses);
  std::vector<ScoreRecord> records;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto pred = io::read_label_mask(preds[i], k);
    const auto gt = io::read_label_mask(args.gt_dir / preds[i].filename(), k);
    const auto m = metrics::macro_metrics(pred, gt, config.foreground_classes);
    const int fold = static_cast<int>(i);
    for (int c : m.foreground_classes) {
      const auto& o = m.per_class.at(c);
      records.push_back({args.model, fold, "dice", std::to_string(c), o.dice});
      records.push_back({args.model, fold, "iou", std::to_string(c), o.iou});
    }
    records.push_back({args.model, fold, "dice", kMacroClass, m.macro_dice});
    records.push_back({args.model, fold, "iou", kMacroClass, m.macro_iou});
  }
  const ScoreTable table(std::move(records));
  io::write_score_table(args.out_csv, table);
  out << fmt::format("wrote {} rows for {} mask pairs to {}\n", table.records().size(), preds.size(),
                     args.out_csv.string());
  return kOk;
}

int cmd_analyze(const AnalyzeArgs& args, const RunConfig& config, std::ostream& out, bool color) {
  if (args.scores.empty()) throw Error("at least one score table required");
  if (!args.protocols.empty() && args.protocols.size() != args.scores.size()) {
    throw Error(fmt::format("{} protocol labels for {} score tables", args.protocols.size(), args.scores.size()));
  }
  stability::ProtocolTables tables;
  for (std::size_t i = 0; i < args.scores.size(); ++i) {
    const std::string label = args.protocols.empty() ? args.scores[i].stem().string() : args.protocols[i];
    try {
      tables.emplace_back(label, io::read_score_table(args.scores[i]));
    } catch (const Error& e) {
      throw Error(fmt::format("{}: {}", args.scores[i].string(), e.what()));
    }
  }

  analysis::AnalysisOptions opts;
  opts.metric = args.metric;
  opts.class_id = args.class_id;
  opts.level = config.level;
  opts.n_resamples = config.n_resamples;
  opts.seed = config.seed;
  opts.alpha = config.alpha;
  opts.exact_friedman = args.exact_friedman;
  opts.effect_variant = args.paired_effects ? stability::EffectVariant::paired : stability::EffectVariant::independent;
  const auto report = analysis::analyze(tables, opts);

  if (args.out_json) io::write_file_atomic(*args.out_json, analysis::to_json(report).dump(2) + "\n");
  if (args.plots_dir) report::write_figures(report, *args.plots_dir);

  for (const auto& r : report.rankings) {
    out << fmt::format("[{}]", r.protocol);
    if (r.friedman) out << fmt::format(" Friedman chi2 = {:.4f}, p = {:.6f}", r.friedman->statistic, r.friedman->p_value);
    if (r.nemenyi) out << fmt::format(", CD = {:.4f}", r.nemenyi->critical_difference);
    if (!r.note.empty()) out << ' ' << r.note;
    out << '\n';
  }
  for (const auto& s : report.instability.slices) {
    if (s.metric == args.metric && s.class_id == args.class_id) {
      out << fmt::format("[{}] winner {} ({:.4f})\n", s.protocol, s.winner, s.winner_mean);
    }
  }
  for (const auto& f : report.instability.flips) {
    if (!f.flipped) continue;
    std::vector<std::string> parts;
    for (const auto& [p, w] : f.winners) parts.push_back(fmt::format("{}={}", p, w));
    const auto line = fmt::format("winner flip on {}/{}: {}", f.metric, f.class_id, fmt::join(parts, ", "));
    out << (color ? fmt::format(fg(fmt::terminal_color::yellow), "{}", line) : line) << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return report.degenerate() ? kDegenerate : kOk;
}

int cmd_xai(const XaiArgs& args, const RunConfig& config, std::ostream& out) {
  const auto probs = io::read_prob_map(args.probmap);
  const int k = args.num_classes.value_or(probs.num_classes());
  const auto pred = io::read_label_mask(args.pred, k);
  const auto gt = io::read_label_mask(args.gt, k);
  const auto image = io::read_gray_image(args.image);
  if (!pred.same_shape(gt)) throw Error("prediction and ground truth differ in shape");
  if (probs.height() != pred.height() || probs.width() != pred.width() || image.height != pred.height() ||
      image.width != pred.width()) {
    throw Error("image, probability map and masks differ in shape");
  }

  std::vector<double> dice;
  for (int c : config.foreground_classes) dice.push_back(metrics::dice_per_class(pred, gt, c));
  const auto masks = xai::class_masks(args.attention_from_gt ? gt : pred, config.foreground_classes);

  std::vector<xai::ExplanationMap> layers;
  layers.push_back(xai::error_map(pred, gt));
  layers.push_back(xai::uncertainty_map(probs));
  layers.push_back(xai::morphology_map(image));
  layers.push_back(xai::class_attention_map(masks, dice));
  layers.push_back(xai::saliency_map(image));
  const auto composite = xai::composite_map(layers, config.xai_weights);

  fs::create_directories(args.out_dir);
  Json summary;
  summary["height"] = composite.height;
  summary["width"] = composite.width;
  summary["weights"] = std::vector<double>(config.xai_weights.alphas.begin(), config.xai_weights.alphas.end());
  summary["attention_masks"] = args.attention_from_gt ? "gt" : "pred";
  Json dj = Json::object();
  for (std::size_t i = 0; i < dice.size(); ++i) dj[std::to_string(config.foreground_classes[i])] = dice[i];
  summary["dice"] = dj;
  Json lj = Json::object();
  for (const auto& l : layers) {
    write_layer(args.out_dir, l);
    lj[std::string(xai::to_string(l.layer))] = summary_json(l.values);
  }
  write_layer(args.out_dir, composite);
  lj["composite"] = summary_json(composite.values);
  summary["layers"] = lj;
  io::write_file_atomic(args.out_dir / "summary.json", summary.dump(2) + "\n");
  out << fmt::format("wrote 6 layers to {}\n", args.out_dir.string());
  return kOk;
}

int cmd_xai_stability(const XaiStabilityArgs& args, const RunConfig&, std::ostream& out) {
  const auto files = list_files(args.maps_dir, ".pmap");
  if (files.empty()) throw Error(fmt::format("{}: no .pmap files", args.maps_dir.string()));
  std::vector<xai::ExplanationMap> maps;
  for (const auto& f : files) maps.push_back(xai::uncertainty_map(io::read_prob_map(f)));
  const auto st = xai::uncertainty_stability(maps);

  fs::create_directories(args.out_dir);
  io::write_gray_png(args.out_dir / "mean.png", st.mean_map.height, st.mean_map.width, st.mean_map.values);
  // Values in [0, 1] have population variance at most 0.25.
  std::vector<double> scaled(st.variance_map.size());
  std::transform(st.variance_map.begin(), st.variance_map.end(), scaled.begin(), [](double v) { return v / 0.25; });
  io::write_gray_png(args.out_dir / "variance.png", st.mean_map.height, st.mean_map.width, scaled);

  Json j;
  j["n_folds"] = st.n_folds;
  j["files"] = Json::array();
  for (const auto& f : files) j["files"].push_back(f.filename().string());
  j["mean"] = summary_json(st.mean_map.values);
  j["variance"] = summary_json(st.variance_map);
  io::write_file_atomic(args.out_dir / "stability.json", j.dump(2) + "\n");
  out << fmt::format("{} folds, max variance {:.6f}\n", st.n_folds, j["variance"]["max"].get<double>());
  return kOk;
}

int cmd_sweep(const SweepArgs& args, const RunConfig& config, std::ostream& out) {
  constexpr std::string_view prefix = "builtin:";
  if (args.objective.rfind(prefix, 0) != 0) {
    throw Error(fmt::format("objective must be builtin:<name> (one of {})",
                            fmt::join(hpo::builtin_objective_names(), ", ")));
  }
  const auto objective = hpo::builtin_objective(std::string_view(args.objective).substr(prefix.size()));
  hpo::SearchSpace space = objective.default_space;
  if (args.space) {
    try {
      space = hpo::SearchSpace::from_json(nlohmann::json::parse(io::read_file(*args.space)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}: {}", args.space->string(), e.what()));
    }
  }

  hpo::SweepOptions opts;
  opts.budget = args.budget;
  opts.init_random = args.init_random;
  opts.seed = config.seed;
  opts.n_candidates = args.n_candidates;
  opts.on_trial = [&](const std::vector<hpo::TrialRecord>& trials) {
    io::write_file_atomic(args.out_csv, hpo::format_trials_csv(trials));
  };
  const auto trials = hpo::run_sweep(space, objective.fn, opts);

  const hpo::TrialRecord* best = nullptr;
  std::size_t failed = 0;
  for (const auto& t : trials) {
    if (!t.score) {
      ++failed;
      continue;
    }
    if (!best || *t.score > *best->score) best = &t;
  }
  if (best) {
    out << fmt::format("best score {} at trial {}: {}\n", io::format_double(*best->score), best->trial_index,
                       hpo::point_to_json(best->point).dump());
  } else {
    out << "no trial succeeded\n";
  }
  if (failed) out << fmt::format("{} of {} trials failed\n", failed, trials.size());
  return kOk;
}

int cmd_splits(const SplitsArgs& args, const RunConfig& config, std::ostream& out) {
  const auto plan = args.k == 0 ? splits::make_loocv(args.n) : splits::make_kfold(args.n, args.k, config.seed);
  const auto json = splits::to_json(plan);
  if (args.out_json) {
    io::write_file_atomic(*args.out_json, json + "\n");
  } else {
    out << json << '\n';
  }
  return kOk;
}

int cmd_report(const ReportArgs& args, const RunConfig&, std::ostream& out) {
  analysis::Json j;
  try {
    j = analysis::Json::parse(io::read_file(args.report_json));
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: {}", args.report_json.string(), e.what()));
  }
  const auto report = analysis::report_from_json(j);
  report::write_figures(report, args.out_dir);
  out << fmt::format("wrote 4 figures to {}\n", args.out_dir.string());
  return report.degenerate() ? kDegenerate : kOk;
}

}  // namespace stabench::cli
