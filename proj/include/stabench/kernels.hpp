#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// variant; both call the same per-element function below, so their outputs
// are bitwise identical for any thread count.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "stabench/rng.hpp"
#include "stabench/special.hpp"

namespace stabench::kernels {

enum class Exec { serial, parallel };

// Mean of one bootstrap resample drawn from the stream stream_seed(seed, index).
inline double resample_mean(std::span<const double> scores, std::uint64_t seed, std::uint64_t index) {
  SplitMix64 rng(stream_seed(seed, index));
  const std::uint64_t n = scores.size();
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) sum += scores[rng.below(n)];
  return sum / static_cast<double>(n);
}

// Shannon entropy in bits of one probability vector, with 0 log 0 = 0.
inline double entropy_bits(const float* p, int num_classes) {
  double h = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    const double v = p[k];
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h < 0.0 ? 0.0 : h;
}

inline double expected_improvement(double mu, double sigma, double f_best) {
  const double gain = mu - f_best;
  if (!(sigma > 0.0)) return gain > 0.0 ? gain : 0.0;
  const double z = gain / sigma;
  const double ei = gain * special::normal_cdf(z) + sigma * special::normal_pdf(z);
  return ei > 0.0 ? ei : 0.0;
}

// Per-pixel mean and population variance of fold values, computed from
// offsets to the first fold so identical inputs give exactly zero variance.
inline void pixel_moments(std::span<const std::span<const double>> stack, std::size_t pixel, double& mean,
                          double& var) {
  const double ref = stack[0][pixel];
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& layer : stack) {
    const double d = layer[pixel] - ref;
    s1 += d;
    s2 += d * d;
  }
  const double n = static_cast<double>(stack.size());
  const double m = s1 / n;
  mean = ref + m;
  const double v = s2 / n - m * m;
  var = v > 0.0 ? v : 0.0;
}

// Sobel gradient magnitude at (y, x) with replicate-padded borders.
inline double sobel_magnitude(std::span<const double> img, int height, int width, int y, int x) {
  auto px = [&](int yy, int xx) {
    yy = yy < 0 ? 0 : (yy >= height ? height - 1 : yy);
    xx = xx < 0 ? 0 : (xx >= width ? width - 1 : xx);
    return img[static_cast<std::size_t>(yy) * width + xx];
  };
  const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                    (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
  const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                    (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
  return std::sqrt(gx * gx + gy * gy);
}

namespace serial {
void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out);
void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out);
void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out);
void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var);
void sobel(std::span<const double> img, int height, int width, std::span<double> out);
}  // namespace serial

namespace omp {
void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out);
void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out);
void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out);
void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var);
void sobel(std::span<const double> img, int height, int width, std::span<double> out);
}  // namespace omp

// Dispatchers used by the library modules.
void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out,
                     Exec exec = Exec::parallel);
void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out,
                 Exec exec = Exec::parallel);
void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out, Exec exec = Exec::parallel);
void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var, Exec exec = Exec::parallel);
void sobel(std::span<const double> img, int height, int width, std::span<double> out,
           Exec exec = Exec::parallel);

}  // namespace stabench::kernels
