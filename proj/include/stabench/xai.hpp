#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "stabench/data_model.hpp"
#include "stabench/kernels.hpp"

namespace stabench::xai {

enum class Layer { error, uncertainty, morphology, attention, saliency, composite };
std::string_view to_string(Layer layer);

// Per-pixel explanation values in [0, 1], row-major.
struct ExplanationMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  Layer layer = Layer::composite;

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const ExplanationMap& o) const { return height == o.height && width == o.width; }
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<unsigned char> values;  // 0 or 1
};

// Indicator masks of the given classes.
std::vector<BinaryMask> class_masks(const LabelMask& mask, std::span<const int> classes);

// 1 where prediction and ground truth disagree, 0 elsewhere.
ExplanationMap error_map(const LabelMask& pred, const LabelMask& gt);

// Raw pixel entropy in bits, 0 log 0 = 0.
std::vector<double> entropy_bits(const ProbMap& probs, kernels::Exec exec = kernels::Exec::parallel);
// Entropy divided by log2 K, so it lies in [0, 1].
ExplanationMap uncertainty_map(const ProbMap& probs, kernels::Exec exec = kernels::Exec::parallel);

struct MorphologyConfig {
  int texture_window = 5;     // side of the local standard deviation window
  int structuring_size = 3;   // side of the square dilation/erosion element
};

// Equal blend of max-normalized local standard deviation and max-normalized
// morphological gradient (dilation minus erosion). Windows are clipped at
// the image border.
ExplanationMap morphology_map(const GrayImage& image, const MorphologyConfig& config = {});

// sum_k (1 - DSC_k) M_k, clamped to [0, 1].
ExplanationMap class_attention_map(std::span<const BinaryMask> masks, std::span<const double> dice_scores);

// Sobel gradient magnitude with replicate padding, max-normalized.
ExplanationMap saliency_map(const GrayImage& image, kernels::Exec exec = kernels::Exec::parallel);

// Weighted mean of the layers; all-zero when the weights sum to 0.
ExplanationMap composite_map(std::span<const ExplanationMap> layers, std::span<const double> weights);
ExplanationMap composite_map(std::span<const ExplanationMap> layers, const XaiWeights& weights);

struct UncertaintyStability {
  ExplanationMap mean_map;
  std::vector<double> variance_map;  // population variance across folds
  std::size_t n_folds = 0;
};

UncertaintyStability uncertainty_stability(std::span<const ExplanationMap> fold_maps,
                                           kernels::Exec exec = kernels::Exec::parallel);

struct LayerSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};
LayerSummary summarize(std::span<const double> values);

}  // namespace stabench::xai
