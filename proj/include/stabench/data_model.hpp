#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stabench {

inline constexpr int kDefaultNumClasses = 4;  // background, lumen, neointima, media
inline constexpr const char* kMacroClass = "macro";

// Integer-labeled class image, row-major.
class LabelMask {
 public:
  LabelMask(int height, int width, int num_classes, std::vector<int> labels);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int at(int y, int x) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  bool same_shape(const LabelMask& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  int height_;
  int width_;
  int num_classes_;
  std::vector<int> labels_;
};

// Per-pixel class probabilities, row-major (y, x, k).
class ProbMap {
 public:
  static constexpr double kNormTolerance = 1e-4;

  ProbMap(int height, int width, int num_classes, std::vector<float> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  float at(std::size_t pixel, int k) const { return values_[pixel * num_classes_ + k]; }
  const std::vector<float>& values() const noexcept { return values_; }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  int height_;
  int width_;
  int num_classes_;
  std::vector<float> values_;
};

// Grayscale intensity image with values in [0, 1], row-major.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct ScoreRecord {
  std::string model;
  int fold = 0;
  std::string metric;
  std::string class_id;  // class name or "macro"
  double value = 0.0;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Fold-by-model score matrix for one (metric, class) slice. Models sorted by
// id, folds ascending; scores[fold_index][model_index].
struct ScoreMatrix {
  std::vector<std::string> models;
  std::vector<int> folds;
  std::vector<std::vector<double>> scores;

  std::vector<double> column(std::size_t model_index) const;
};

// Long-form score table. Construction enforces unique keys and a rectangular
// model x fold design in every (metric, class) slice.
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::vector<ScoreRecord> records);

  const std::vector<ScoreRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }

  std::vector<std::string> models() const;
  std::vector<std::pair<std::string, std::string>> slices() const;  // (metric, class)
  bool has_slice(const std::string& metric, const std::string& class_id) const;
  ScoreMatrix matrix(const std::string& metric, const std::string& class_id) const;

 private:
  std::vector<ScoreRecord> records_;
};

enum class Protocol { loocv, kfold };

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct SplitPlan {
  std::size_t n_samples = 0;
  Protocol protocol = Protocol::loocv;
  std::size_t k = 0;  // number of folds
  std::uint64_t seed = 0;
  std::vector<Fold> folds;

  // Throws if the folds do not partition {0..n-1}.
  void validate() const;
};

struct FocalParams {
  double alpha = 0.8;
  double gamma = 2.0;
  void validate() const;
};

struct CompositeWeights {
  double lambda_focal = 0.5;
  double lambda_dice = 0.5;
  void validate() const;
};

// Mixing weights of the five explanation layers, in layer order
// (error, uncertainty, morphology, attention, saliency).
struct XaiWeights {
  std::array<double, 5> alphas{0.2, 0.2, 0.2, 0.2, 0.2};
  void validate() const;
};

}  // namespace stabench
