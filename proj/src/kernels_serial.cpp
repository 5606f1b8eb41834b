#include "stabench/kernels.hpp"

namespace stabench::kernels {

namespace serial {

void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out) {
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = resample_mean(scores, seed, b);
}

void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out) {
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = entropy_bits(probs.data() + p * num_classes, num_classes);
  }
}

void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = kernels::expected_improvement(mu[i], sigma[i], f_best);
  }
}

void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var) {
  for (std::size_t p = 0; p < mean.size(); ++p) kernels::pixel_moments(stack, p, mean[p], var[p]);
}

void sobel(std::span<const double> img, int height, int width, std::span<double> out) {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out[static_cast<std::size_t>(y) * width + x] = sobel_magnitude(img, height, width, y, x);
    }
  }
}

}  // namespace serial

void bootstrap_means(std::span<const double> scores, std::uint64_t seed, std::span<double> out, Exec exec) {
  exec == Exec::parallel ? omp::bootstrap_means(scores, seed, out) : serial::bootstrap_means(scores, seed, out);
}

void entropy_map(std::span<const float> probs, int num_classes, std::span<double> out, Exec exec) {
  exec == Exec::parallel ? omp::entropy_map(probs, num_classes, out)
                         : serial::entropy_map(probs, num_classes, out);
}

void expected_improvement(std::span<const double> mu, std::span<const double> sigma, double f_best,
                          std::span<double> out, Exec exec) {
  exec == Exec::parallel ? omp::expected_improvement(mu, sigma, f_best, out)
                         : serial::expected_improvement(mu, sigma, f_best, out);
}

void pixel_moments(std::span<const std::span<const double>> stack, std::span<double> mean,
                   std::span<double> var, Exec exec) {
  exec == Exec::parallel ? omp::pixel_moments(stack, mean, var) : serial::pixel_moments(stack, mean, var);
}

void sobel(std::span<const double> img, int height, int width, std::span<double> out, Exec exec) {
  exec == Exec::parallel ? omp::sobel(img, height, width, out) : serial::sobel(img, height, width, out);
}

}  // namespace stabench::kernels
