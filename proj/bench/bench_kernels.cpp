#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stabench/kernels.hpp"

using namespace stabench;

namespace {

std::vector<double> uniform_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

std::vector<float> prob_values(std::size_t pixels, int k) {
  const auto raw = uniform_values(pixels * k, 3);
  std::vector<float> out(raw.size());
  for (std::size_t p = 0; p < pixels; ++p) {
    double s = 0.0;
    for (int c = 0; c < k; ++c) s += raw[p * k + c];
    for (int c = 0; c < k; ++c) out[p * k + c] = static_cast<float>(raw[p * k + c] / s);
  }
  return out;
}

template <kernels::Exec E>
void BM_Bootstrap(benchmark::State& state) {
  const auto scores = uniform_values(9, 1);
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::bootstrap_means(scores, 42, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Exec E>
void BM_Entropy(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto probs = prob_values(side * side, 4);
  std::vector<double> out(side * side);
  for (auto _ : state) {
    kernels::entropy_map(probs, 4, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <kernels::Exec E>
void BM_Sobel(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = uniform_values(static_cast<std::size_t>(side) * side, 2);
  std::vector<double> out(img.size());
  for (auto _ : state) {
    kernels::sobel(img, side, side, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <kernels::Exec E>
void BM_PixelMoments(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<double>> layers;
  for (int f = 0; f < 9; ++f) layers.push_back(uniform_values(side * side, 10 + f));
  const std::vector<std::span<const double>> stack(layers.begin(), layers.end());
  std::vector<double> mean(side * side), var(side * side);
  for (auto _ : state) {
    kernels::pixel_moments(stack, mean, var, E);
    benchmark::DoNotOptimize(var.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mean.size()));
}

template <kernels::Exec E>
void BM_ExpectedImprovement(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = uniform_values(n, 4);
  const auto sigma = uniform_values(n, 5);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::expected_improvement(mu, sigma, 0.5, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

constexpr auto kSerial = kernels::Exec::serial;
constexpr auto kParallel = kernels::Exec::parallel;

}  // namespace

BENCHMARK(BM_Bootstrap<kSerial>)->Arg(10000);
BENCHMARK(BM_Bootstrap<kParallel>)->Arg(10000);
BENCHMARK(BM_Entropy<kSerial>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Entropy<kParallel>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Sobel<kSerial>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Sobel<kParallel>)->Arg(256)->Arg(1024);
BENCHMARK(BM_PixelMoments<kSerial>)->Arg(256);
BENCHMARK(BM_PixelMoments<kParallel>)->Arg(256);
BENCHMARK(BM_ExpectedImprovement<kSerial>)->Arg(512)->Arg(65536);
BENCHMARK(BM_ExpectedImprovement<kParallel>)->Arg(512)->Arg(65536);

BENCHMARK_MAIN();
