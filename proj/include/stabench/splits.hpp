#pragma once

#include <cstdint>
#include <string>

#include "stabench/data_model.hpp"

namespace stabench::splits {

// n folds, fold i tests {i} and trains on the rest.
SplitPlan make_loocv(std::size_t n);

// Fisher-Yates shuffle driven by SplitMix64(seed), then k contiguous blocks;
// the first n % k blocks get one extra sample. Index lists are sorted.
SplitPlan make_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

// {"protocol": ..., "seed": ..., "folds": [{"train": [...], "test": [...]}]}
std::string to_json(const SplitPlan& plan);

}  // namespace stabench::splits
