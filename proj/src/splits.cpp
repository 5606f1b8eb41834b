#include "stabench/splits.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "stabench/error.hpp"
#include "stabench/rng.hpp"

namespace stabench::splits {

namespace {

Fold fold_from_test(std::size_t n, std::vector<std::size_t> test) {
  std::sort(test.begin(), test.end());
  Fold f;
  f.test = std::move(test);
  f.train.reserve(n - f.test.size());
  for (std::size_t i = 0, t = 0; i < n; ++i) {
    if (t < f.test.size() && f.test[t] == i) {
      ++t;
      continue;
    }
    f.train.push_back(i);
  }
  return f;
}

}  // namespace

SplitPlan make_loocv(std::size_t n) {
  if (n < 2) throw Error(fmt::format("LOOCV needs at least 2 samples, got {}", n));
  SplitPlan plan;
  plan.n_samples = n;
  plan.protocol = Protocol::loocv;
  plan.k = n;
  for (std::size_t i = 0; i < n; ++i) plan.folds.push_back(fold_from_test(n, {i}));
  return plan;
}

SplitPlan make_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw Error(fmt::format("k-fold needs 2 <= k <= n, got k={} n={}", k, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }

  SplitPlan plan;
  plan.n_samples = n;
  plan.protocol = Protocol::kfold;
  plan.k = k;
  plan.seed = seed;
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    plan.folds.push_back(fold_from_test(
        n, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(start + len))));
    start += len;
  }
  return plan;
}

std::string to_json(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["protocol"] = plan.protocol == Protocol::loocv ? "loocv" : fmt::format("kfold({})", plan.k);
  j["seed"] = plan.seed;
  j["n_samples"] = plan.n_samples;
  auto& folds = j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : plan.folds) {
    nlohmann::ordered_json fj;
    fj["train"] = f.train;
    fj["test"] = f.test;
    folds.push_back(std::move(fj));
  }
  return j.dump(2) + "\n";
}

}  // namespace stabench::splits
