#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stabench/data_model.hpp"

namespace test_support {

namespace fs = std::filesystem;

inline stabench::LabelMask random_mask(std::mt19937_64& gen, int h, int w, int k) {
  std::uniform_int_distribution<int> d(0, k - 1);
  std::vector<int> labels(static_cast<std::size_t>(h) * w);
  for (auto& l : labels) l = d(gen);
  return stabench::LabelMask(h, w, k, std::move(labels));
}

inline stabench::ProbMap random_probs(std::mt19937_64& gen, int h, int w, int k) {
  std::uniform_real_distribution<double> d(0.01, 1.0);
  std::vector<float> v;
  for (int p = 0; p < h * w; ++p) {
    std::vector<double> row(k);
    double s = 0.0;
    for (auto& x : row) s += (x = d(gen));
    for (auto x : row) v.push_back(static_cast<float>(x / s));
  }
  return stabench::ProbMap(h, w, k, std::move(v));
}

inline stabench::ProbMap one_hot_probs(const stabench::LabelMask& mask) {
  std::vector<float> v(mask.size() * mask.num_classes(), 0.0f);
  for (std::size_t i = 0; i < mask.size(); ++i) v[i * mask.num_classes() + mask.labels()[i]] = 1.0f;
  return stabench::ProbMap(mask.height(), mask.width(), mask.num_classes(), std::move(v));
}

// Fresh empty directory under the system temp dir.
inline fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("stabench_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline fs::path data_dir() { return fs::path(STABENCH_SOURCE_DIR) / "data"; }

}  // namespace test_support
