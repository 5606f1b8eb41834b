#include "stabench/xai.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stabench/error.hpp"

namespace stabench::xai {

namespace {

void check_image(const GrayImage& image) {
  if (image.height < 3 || image.width < 3) {
    throw Error(fmt::format("image {}x{} smaller than 3x3", image.height, image.width));
  }
  if (image.values.size() != static_cast<std::size_t>(image.height) * image.width) {
    throw Error("image value count does not match its shape");
  }
  for (double v : image.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(fmt::format("image value {} outside [0, 1]", v));
  }
}

void max_normalize(std::vector<double>& values) {
  const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  if (peak <= 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (auto& v : values) v = std::clamp(v / peak, 0.0, 1.0);
}

ExplanationMap make_map(int height, int width, Layer layer) {
  return {height, width, std::vector<double>(static_cast<std::size_t>(height) * width, 0.0), layer};
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::error: return "error";
    case Layer::uncertainty: return "uncertainty";
    case Layer::morphology: return "morphology";
    case Layer::attention: return "attention";
    case Layer::saliency: return "saliency";
    case Layer::composite: return "composite";
  }
  return "composite";
}

std::vector<BinaryMask> class_masks(const LabelMask& mask, std::span<const int> classes) {
  std::vector<BinaryMask> out;
  for (int k : classes) {
    if (k < 0 || k >= mask.num_classes()) throw Error(fmt::format("class {} out of range", k));
    BinaryMask m{mask.height(), mask.width(), std::vector<unsigned char>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) m.values[i] = mask.labels()[i] == k ? 1 : 0;
    out.push_back(std::move(m));
  }
  return out;
}

ExplanationMap error_map(const LabelMask& pred, const LabelMask& gt) {
  if (!pred.same_shape(gt)) throw Error("shape mismatch between prediction and ground truth");
  auto out = make_map(gt.height(), gt.width(), Layer::error);
  for (std::size_t i = 0; i < gt.size(); ++i) out.values[i] = pred.labels()[i] == gt.labels()[i] ? 0.0 : 1.0;
  return out;
}

std::vector<double> entropy_bits(const ProbMap& probs, kernels::Exec exec) {
  std::vector<double> out(probs.pixels());
  kernels::entropy_map(probs.values(), probs.num_classes(), out, exec);
  return out;
}

ExplanationMap uncertainty_map(const ProbMap& probs, kernels::Exec exec) {
  auto out = make_map(probs.height(), probs.width(), Layer::uncertainty);
  if (probs.num_classes() < 2) return out;
  out.values = entropy_bits(probs, exec);
  const double scale = std::log2(static_cast<double>(probs.num_classes()));
  for (auto& v : out.values) v = std::clamp(v / scale, 0.0, 1.0);
  return out;
}

ExplanationMap morphology_map(const GrayImage& image, const MorphologyConfig& config) {
  check_image(image);
  if (config.texture_window < 1 || config.structuring_size < 1 || config.texture_window % 2 == 0 ||
      config.structuring_size % 2 == 0) {
    throw Error("morphology window sizes must be odd and positive");
  }
  const int h = image.height;
  const int w = image.width;
  std::vector<double> texture(image.values.size());
  std::vector<double> gradient(image.values.size());
  const int tr = config.texture_window / 2;
  const int sr = config.structuring_size / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Offsets from the centre value keep a flat window at exactly zero.
      const double centre = image.at(y, x);
      double s1 = 0.0;
      double s2 = 0.0;
      int n = 0;
      for (int yy = std::max(0, y - tr); yy <= std::min(h - 1, y + tr); ++yy) {
        for (int xx = std::max(0, x - tr); xx <= std::min(w - 1, x + tr); ++xx) {
          const double d = image.at(yy, xx) - centre;
          s1 += d;
          s2 += d * d;
          ++n;
        }
      }
      const double m = s1 / n;
      texture[static_cast<std::size_t>(y) * w + x] = std::sqrt(std::max(0.0, s2 / n - m * m));

      double lo = centre;
      double hi = centre;
      for (int yy = std::max(0, y - sr); yy <= std::min(h - 1, y + sr); ++yy) {
        for (int xx = std::max(0, x - sr); xx <= std::min(w - 1, x + sr); ++xx) {
          lo = std::min(lo, image.at(yy, xx));
          hi = std::max(hi, image.at(yy, xx));
        }
      }
      gradient[static_cast<std::size_t>(y) * w + x] = hi - lo;
    }
  }
  max_normalize(texture);
  max_normalize(gradient);
  auto out = make_map(h, w, Layer::morphology);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = 0.5 * texture[i] + 0.5 * gradient[i];
  return out;
}

ExplanationMap class_attention_map(std::span<const BinaryMask> masks, std::span<const double> dice_scores) {
  if (masks.empty()) throw Error("class attention needs at least one class mask");
  if (masks.size() != dice_scores.size()) throw Error("one Dice score per class mask required");
  for (double d : dice_scores) {
    if (!(d >= 0.0 && d <= 1.0)) throw Error(fmt::format("Dice score {} outside [0, 1]", d));
  }
  const int h = masks.front().height;
  const int w = masks.front().width;
  auto out = make_map(h, w, Layer::attention);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    const auto& m = masks[k];
    if (m.height != h || m.width != w || m.values.size() != out.values.size()) {
      throw Error("class masks differ in shape");
    }
    const double deficit = 1.0 - dice_scores[k];
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      if (m.values[i] > 1) throw Error("class masks must be binary");
      out.values[i] += deficit * m.values[i];
    }
  }
  for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

ExplanationMap saliency_map(const GrayImage& image, kernels::Exec exec) {
  check_image(image);
  auto out = make_map(image.height, image.width, Layer::saliency);
  kernels::sobel(image.values, image.height, image.width, out.values, exec);
  max_normalize(out.values);
  return out;
}

ExplanationMap composite_map(std::span<const ExplanationMap> layers, std::span<const double> weights) {
  if (layers.empty()) throw Error("composite needs at least one layer");
  if (layers.size() != weights.size()) throw Error("one weight per layer required");
  double total = 0.0;
  for (double a : weights) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw Error(fmt::format("layer weight {} must be >= 0", a));
    total += a;
  }
  auto out = make_map(layers.front().height, layers.front().width, Layer::composite);
  for (const auto& l : layers) {
    if (!l.same_shape(layers.front()) || l.values.size() != out.values.size()) {
      throw Error("composite layers differ in shape");
    }
  }
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < layers.size(); ++l) s += weights[l] * layers[l].values[i];
    out.values[i] = std::clamp(s / total, 0.0, 1.0);
  }
  return out;
}

ExplanationMap composite_map(std::span<const ExplanationMap> layers, const XaiWeights& weights) {
  weights.validate();
  return composite_map(layers, std::span<const double>(weights.alphas));
}

UncertaintyStability uncertainty_stability(std::span<const ExplanationMap> fold_maps, kernels::Exec exec) {
  if (fold_maps.size() < 2) throw Error("stability analysis needs at least 2 fold maps");
  std::vector<std::span<const double>> stack;
  for (const auto& m : fold_maps) {
    if (!m.same_shape(fold_maps.front()) || m.values.size() != fold_maps.front().values.size()) {
      throw Error("fold maps differ in shape");
    }
    stack.emplace_back(m.values);
  }
  UncertaintyStability out;
  out.n_folds = fold_maps.size();
  out.mean_map = make_map(fold_maps.front().height, fold_maps.front().width, fold_maps.front().layer);
  out.variance_map.assign(out.mean_map.values.size(), 0.0);
  kernels::pixel_moments(stack, out.mean_map.values, out.variance_map, exec);
  return out;
}

LayerSummary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  LayerSummary s{values[0], values[0], 0.0};
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

}  // namespace stabench::xai
