#include "stabench/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "stabench/error.hpp"

namespace stabench {

LabelMask::LabelMask(int height, int width, int num_classes, std::vector<int> labels)
    : height_(height), width_(width), num_classes_(num_classes), labels_(std::move(labels)) {
  if (height < 1 || width < 1) throw Error(fmt::format("mask shape {}x{} is empty", height, width));
  if (num_classes < 2) throw Error(fmt::format("mask needs at least 2 classes, got {}", num_classes));
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    throw Error(fmt::format("mask has {} labels, expected {}", labels_.size(),
                            static_cast<std::size_t>(height) * width));
  }
  for (int v : labels_) {
    if (v < 0 || v >= num_classes) {
      throw Error(fmt::format("label {} outside [0, {}]", v, num_classes - 1));
    }
  }
}

ProbMap::ProbMap(int height, int width, int num_classes, std::vector<float> values)
    : height_(height), width_(width), num_classes_(num_classes), values_(std::move(values)) {
  if (height < 1 || width < 1 || num_classes < 1) {
    throw Error(fmt::format("invalid probability map shape {}x{}x{}", height, width, num_classes));
  }
  if (values_.size() != pixels() * num_classes_) {
    throw Error(fmt::format("probability map has {} values, expected {}", values_.size(),
                            pixels() * num_classes_));
  }
  for (std::size_t p = 0; p < pixels(); ++p) {
    double sum = 0.0;
    for (int k = 0; k < num_classes_; ++k) {
      const float v = at(p, k);
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw Error(fmt::format("probability {} at pixel {} outside [0, 1]", v, p));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw Error(fmt::format("probabilities at pixel {} not normalized (sum {})", p, sum));
    }
  }
}

std::vector<double> ScoreMatrix::column(std::size_t model_index) const {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& row : scores) out.push_back(row[model_index]);
  return out;
}

ScoreTable::ScoreTable(std::vector<ScoreRecord> records) : records_(std::move(records)) {
  std::set<std::tuple<std::string, int, std::string, std::string>> keys;
  for (const auto& r : records_) {
    if (!std::isfinite(r.value)) {
      throw Error(fmt::format("non-finite value for ({}, {}, {}, {})", r.model, r.fold, r.metric,
                              r.class_id));
    }
    if (!keys.emplace(r.model, r.fold, r.metric, r.class_id).second) {
      throw Error(fmt::format("duplicate record ({}, {}, {}, {})", r.model, r.fold, r.metric,
                              r.class_id));
    }
  }
  for (const auto& [metric, cls] : slices()) {
    std::set<std::string> models;
    std::set<int> folds;
    std::size_t cells = 0;
    for (const auto& r : records_) {
      if (r.metric != metric || r.class_id != cls) continue;
      models.insert(r.model);
      folds.insert(r.fold);
      ++cells;
    }
    if (cells != models.size() * folds.size()) {
      throw Error(fmt::format("non-rectangular design in slice ({}, {}): {} cells for {} models x {} folds",
                              metric, cls, cells, models.size(), folds.size()));
    }
  }
}

std::vector<std::string> ScoreTable::models() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.model);
  return {s.begin(), s.end()};
}

std::vector<std::pair<std::string, std::string>> ScoreTable::slices() const {
  std::set<std::pair<std::string, std::string>> s;
  for (const auto& r : records_) s.emplace(r.metric, r.class_id);
  return {s.begin(), s.end()};
}

bool ScoreTable::has_slice(const std::string& metric, const std::string& class_id) const {
  return std::any_of(records_.begin(), records_.end(), [&](const ScoreRecord& r) {
    return r.metric == metric && r.class_id == class_id;
  });
}

ScoreMatrix ScoreTable::matrix(const std::string& metric, const std::string& class_id) const {
  std::set<std::string> model_set;
  std::set<int> fold_set;
  for (const auto& r : records_) {
    if (r.metric != metric || r.class_id != class_id) continue;
    model_set.insert(r.model);
    fold_set.insert(r.fold);
  }
  if (model_set.empty()) throw Error(fmt::format("no records for metric '{}' class '{}'", metric, class_id));

  ScoreMatrix m;
  m.models.assign(model_set.begin(), model_set.end());
  m.folds.assign(fold_set.begin(), fold_set.end());
  m.scores.assign(m.folds.size(), std::vector<double>(m.models.size(), 0.0));
  for (const auto& r : records_) {
    if (r.metric != metric || r.class_id != class_id) continue;
    const auto fi = std::lower_bound(m.folds.begin(), m.folds.end(), r.fold) - m.folds.begin();
    const auto mi = std::lower_bound(m.models.begin(), m.models.end(), r.model) - m.models.begin();
    m.scores[fi][mi] = r.value;
  }
  return m;
}

void SplitPlan::validate() const {
  std::vector<int> seen(n_samples, 0);
  for (const auto& f : folds) {
    std::vector<char> in_fold(n_samples, 0);
    for (auto i : f.test) {
      if (i >= n_samples) throw Error("test index out of range");
      ++seen[i];
      in_fold[i] = 1;
    }
    for (auto i : f.train) {
      if (i >= n_samples) throw Error("train index out of range");
      if (in_fold[i]) throw Error(fmt::format("index {} in both train and test", i));
      in_fold[i] = 1;
    }
    if (std::find(in_fold.begin(), in_fold.end(), 0) != in_fold.end()) {
      throw Error("fold does not cover every sample");
    }
  }
  for (std::size_t i = 0; i < n_samples; ++i) {
    if (seen[i] != 1) throw Error(fmt::format("sample {} appears in {} test sets", i, seen[i]));
  }
}

void FocalParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(fmt::format("focal alpha {} outside (0, 1]", alpha));
  if (!(gamma >= 0.0)) throw Error(fmt::format("focal gamma {} must be >= 0", gamma));
}

void CompositeWeights::validate() const {
  if (!(lambda_focal >= 0.0 && lambda_dice >= 0.0) || lambda_focal + lambda_dice <= 0.0) {
    throw Error("composite loss weights must be >= 0 with a positive sum");
  }
}

void XaiWeights::validate() const {
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw Error(fmt::format("xai weight {} must be >= 0", a));
  }
}

}  // namespace stabench
