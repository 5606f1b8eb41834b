#pragma once

#include <map>
#include <span>
#include <vector>

#include "stabench/data_model.hpp"

namespace stabench::metrics {

inline constexpr double kProbClamp = 1e-7;   // floor applied before every logarithm
inline constexpr double kDiceSmooth = 1e-6;  // additive constant in the soft Dice ratio

struct Overlap {
  double dice = 1.0;
  double iou = 1.0;
};

struct ClassMetrics {
  std::map<int, Overlap> per_class;
  std::vector<int> foreground_classes;
  double macro_dice = 0.0;
  double macro_iou = 0.0;
};

inline const std::vector<int> kDefaultForeground{1, 2, 3};

// Hard-mask overlap of class k. A class absent from both masks scores 1.
double dice_per_class(const LabelMask& pred, const LabelMask& gt, int k);
double iou_per_class(const LabelMask& pred, const LabelMask& gt, int k);
Overlap overlap_per_class(const LabelMask& pred, const LabelMask& gt, int k);

// Unweighted mean over the given per-class values.
double macro_average(std::span<const double> values);

ClassMetrics macro_metrics(const LabelMask& pred, const LabelMask& gt,
                           std::span<const int> foreground = kDefaultForeground);

// Builds the aggregate from already-computed per-class overlaps.
ClassMetrics aggregate(const std::map<int, Overlap>& per_class, std::span<const int> foreground);

// Mean over pixels of -alpha (1 - p_t)^gamma ln p_t.
double focal_loss(const ProbMap& probs, const LabelMask& gt, const FocalParams& params = {});

// 1 - mean over all K classes of (2 sum P_k Y_k + eps) / (sum P_k + sum Y_k + eps).
double dice_loss(const ProbMap& probs, const LabelMask& gt);

double composite_loss(const ProbMap& probs, const LabelMask& gt, const FocalParams& focal = {},
                      const CompositeWeights& weights = {});

}  // namespace stabench::metrics
