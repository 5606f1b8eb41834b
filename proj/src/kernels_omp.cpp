#include <omp.h>

#include "stabench/kernels.hpp"

namespace stabench::kernels::omp {

void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < n; ++b) out[b] = resample_mean(scores, seed, static_cast<std::uint64_t>(b));
}

void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) out[p] = entropy_bits(probs.data() + p * num_classes, num_classes);
}

void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out) {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = kernels::expected_improvement(mu[i], sigma[i], f_best);
}

void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var) {
  const auto n = static_cast<std::int64_t>(mean.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
    kernels::pixel_moments(stack, static_cast<std::size_t>(p), mean[p], var[p]);
  }
}

void sobel(std::span<const double> img, int height, int width, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out[static_cast<std::size_t>(y) * width + x] = sobel_magnitude(img, height, width, y, x);
    }
  }
}

}  // namespace stabench::kernels::omp
