#include "stabench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "stabench/error.hpp"

namespace stabench::metrics {

namespace {

void check_pair(const LabelMask& pred, const LabelMask& gt) {
  if (!pred.same_shape(gt)) {
    throw Error(fmt::format("shape mismatch: {}x{} vs {}x{}", pred.height(), pred.width(), gt.height(),
                            gt.width()));
  }
  if (pred.num_classes() != gt.num_classes()) {
    throw Error(fmt::format("class count mismatch: {} vs {}", pred.num_classes(), gt.num_classes()));
  }
}

void check_probs(const ProbMap& probs, const LabelMask& gt) {
  if (probs.height() != gt.height() || probs.width() != gt.width()) {
    throw Error("shape mismatch between probability map and mask");
  }
  if (probs.num_classes() != gt.num_classes()) {
    throw Error(fmt::format("class count mismatch: {} vs {}", probs.num_classes(), gt.num_classes()));
  }
}

}  // namespace

Overlap overlap_per_class(const LabelMask& pred, const LabelMask& gt, int k) {
  check_pair(pred, gt);
  if (k < 0 || k >= gt.num_classes()) throw Error(fmt::format("class {} out of range", k));
  std::int64_t inter = 0;
  std::int64_t in_pred = 0;
  std::int64_t in_gt = 0;
  const auto& p = pred.labels();
  const auto& g = gt.labels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] == k;
    const bool b = g[i] == k;
    in_pred += a;
    in_gt += b;
    inter += a && b;
  }
  if (in_pred + in_gt == 0) return {};
  const auto uni = in_pred + in_gt - inter;
  return {2.0 * static_cast<double>(inter) / static_cast<double>(in_pred + in_gt),
          static_cast<double>(inter) / static_cast<double>(uni)};
}

double dice_per_class(const LabelMask& pred, const LabelMask& gt, int k) {
  return overlap_per_class(pred, gt, k).dice;
}

double iou_per_class(const LabelMask& pred, const LabelMask& gt, int k) {
  return overlap_per_class(pred, gt, k).iou;
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw Error("macro average of an empty class list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

ClassMetrics aggregate(const std::map<int, Overlap>& per_class, std::span<const int> foreground) {
  if (foreground.empty()) throw Error("foreground class list is empty");
  ClassMetrics out;
  out.per_class = per_class;
  out.foreground_classes.assign(foreground.begin(), foreground.end());
  std::vector<double> dice;
  std::vector<double> iou;
  for (int k : foreground) {
    const auto it = per_class.find(k);
    if (it == per_class.end()) throw Error(fmt::format("no metrics for foreground class {}", k));
    dice.push_back(it->second.dice);
    iou.push_back(it->second.iou);
  }
  out.macro_dice = macro_average(dice);
  out.macro_iou = macro_average(iou);
  return out;
}

ClassMetrics macro_metrics(const LabelMask& pred, const LabelMask& gt, std::span<const int> foreground) {
  check_pair(pred, gt);
  if (foreground.empty()) throw Error("foreground class list is empty");
  std::map<int, Overlap> per_class;
  for (int k : foreground) {
    if (k < 0 || k >= gt.num_classes()) throw Error(fmt::format("foreground class {} out of range", k));
    per_class[k] = overlap_per_class(pred, gt, k);
  }
  return aggregate(per_class, foreground);
}

double focal_loss(const ProbMap& probs, const LabelMask& gt, const FocalParams& params) {
  check_probs(probs, gt);
  params.validate();
  const auto& labels = gt.labels();
  double sum = 0.0;
  for (std::size_t p = 0; p < probs.pixels(); ++p) {
    const double pt = std::clamp(static_cast<double>(probs.at(p, labels[p])), kProbClamp, 1.0);
    sum += -params.alpha * std::pow(1.0 - pt, params.gamma) * std::log(pt);
  }
  return sum / static_cast<double>(probs.pixels());
}

double dice_loss(const ProbMap& probs, const LabelMask& gt) {
  check_probs(probs, gt);
  const int num_classes = probs.num_classes();
  std::vector<double> inter(num_classes, 0.0);
  std::vector<double> prob_mass(num_classes, 0.0);
  std::vector<double> gt_mass(num_classes, 0.0);
  const auto& labels = gt.labels();
  for (std::size_t p = 0; p < probs.pixels(); ++p) {
    for (int k = 0; k < num_classes; ++k) prob_mass[k] += probs.at(p, k);
    inter[labels[p]] += probs.at(p, labels[p]);
    gt_mass[labels[p]] += 1.0;
  }
  double ratio_sum = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    ratio_sum += (2.0 * inter[k] + kDiceSmooth) / (prob_mass[k] + gt_mass[k] + kDiceSmooth);
  }
  return 1.0 - ratio_sum / num_classes;
}

double composite_loss(const ProbMap& probs, const LabelMask& gt, const FocalParams& focal,
                      const CompositeWeights& weights) {
  weights.validate();
  return weights.lambda_focal * focal_loss(probs, gt, focal) + weights.lambda_dice * dice_loss(probs, gt);
}

}  // namespace stabench::metrics
