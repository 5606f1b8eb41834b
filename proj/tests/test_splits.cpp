#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <set>

#include "stabench/error.hpp"
#include "stabench/splits.hpp"

using namespace stabench;

namespace {

void check_partition(const SplitPlan& plan) {
  std::vector<int> seen(plan.n_samples, 0);
  for (const auto& f : plan.folds) {
    CHECK(std::is_sorted(f.test.begin(), f.test.end()));
    CHECK(std::is_sorted(f.train.begin(), f.train.end()));
    CHECK(f.test.size() + f.train.size() == plan.n_samples);
    std::set<std::size_t> all(f.test.begin(), f.test.end());
    for (auto i : f.train) CHECK(all.insert(i).second);
    CHECK(all.size() == plan.n_samples);
    for (auto i : f.test) ++seen[i];
  }
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("leave-one-out") {
  const auto p = splits::make_loocv(9);
  CHECK(p.folds.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(p.folds[i].test == std::vector<std::size_t>{i});
  check_partition(p);

  const auto two = splits::make_loocv(2);
  CHECK(two.folds[0].train == std::vector<std::size_t>{1});
  CHECK(two.folds[0].test == std::vector<std::size_t>{0});
  CHECK(two.folds[1].train == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(splits::make_loocv(1), Error);
}

TEST_CASE("k-fold partitions") {
  const auto p = splits::make_kfold(9, 3, 7);
  REQUIRE(p.folds.size() == 3);
  for (const auto& f : p.folds) CHECK(f.test.size() == 3);
  check_partition(p);

  for (std::size_t n = 2; n < 30; ++n) {
    for (std::size_t k = 2; k <= n; ++k) {
      const auto q = splits::make_kfold(n, k, n * 31 + k);
      check_partition(q);
      std::size_t lo = n, hi = 0;
      for (const auto& f : q.folds) {
        lo = std::min(lo, f.test.size());
        hi = std::max(hi, f.test.size());
      }
      CHECK(hi - lo <= 1);
    }
  }
  CHECK_THROWS_AS(splits::make_kfold(3, 4, 0), Error);
  CHECK_THROWS_AS(splits::make_kfold(3, 1, 0), Error);
}

TEST_CASE("k equal to n matches leave-one-out up to order") {
  const auto p = splits::make_kfold(6, 6, 99);
  std::vector<std::size_t> tests;
  for (const auto& f : p.folds) {
    REQUIRE(f.test.size() == 1);
    tests.push_back(f.test[0]);
  }
  std::sort(tests.begin(), tests.end());
  CHECK(tests == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("k-fold is deterministic and seed-sensitive") {
  CHECK(splits::to_json(splits::make_kfold(9, 3, 7)) == splits::to_json(splits::make_kfold(9, 3, 7)));
  bool differs = false;
  for (std::uint64_t s = 0; s < 10 && !differs; ++s) {
    differs = splits::to_json(splits::make_kfold(9, 3, s)) != splits::to_json(splits::make_kfold(9, 3, s + 100));
  }
  CHECK(differs);
}

TEST_CASE("split json shape") {
  const auto j = nlohmann::json::parse(splits::to_json(splits::make_kfold(9, 3, 7)));
  CHECK(j["protocol"] == "kfold(3)");
  CHECK(j["seed"] == 7);
  CHECK(j["n_samples"] == 9);
  CHECK(j["folds"].size() == 3);
  CHECK(nlohmann::json::parse(splits::to_json(splits::make_loocv(3)))["protocol"] == "loocv");
}
