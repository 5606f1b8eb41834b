#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "stabench/error.hpp"
#include "stabench/kernels.hpp"

namespace stabench::hpo {

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

using ParamValue = std::variant<double, std::string>;
using Point = std::map<std::string, ParamValue>;

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
struct LogUniform {
  double lo = 1e-5;
  double hi = 1e-2;
};
struct Categorical {
  std::vector<ParamValue> values;
};

struct Dimension {
  std::string name;
  std::variant<Uniform, LogUniform, Categorical> kind;
};

class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<Dimension> dims);

  const std::vector<Dimension>& dims() const noexcept { return dims_; }
  // Length of the encoded vector: 1 per continuous dim, one-hot width per categorical.
  std::size_t encoded_size() const noexcept;

  // {"dims": [{"name", "kind": "uniform"|"log_uniform"|"categorical", "lo", "hi" | "values"}]}
  static SearchSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<Dimension> dims_;
};

nlohmann::json point_to_json(const Point& point);
std::string format_value(const ParamValue& v);

// Unit-cube encoding: linear for uniform, log-linear for log_uniform,
// one-hot for categorical.
std::vector<double> encode(const SearchSpace& space, const Point& point);

std::vector<Point> sample_space(const SearchSpace& space, std::uint64_t seed, std::size_t n);

// ---------------------------------------------------------------------------
// Gaussian-process surrogate
// ---------------------------------------------------------------------------

struct KernelParams {
  double length_scale = 0.3;
  double amplitude = 1.0;  // signal variance
  double noise = 1e-6;     // observation noise variance
};

inline const std::vector<double> kLengthScaleGrid{0.1, 0.2, 0.3, 0.5, 1.0};

double rbf(const KernelParams& params, std::span<const double> a, std::span<const double> b);

struct Posterior {
  double mu = 0.0;
  double sigma = 0.0;
};

class GaussianProcess {
 public:
  explicit GaussianProcess(KernelParams params = {});

  // Conditions on (X, y). Throws NumericError when K + noise I is not
  // positive definite; the caller may retry with a larger noise.
  void fit(std::vector<std::vector<double>> inputs, std::vector<double> targets);

  Posterior posterior(std::span<const double> x) const;
  double log_marginal_likelihood() const;

  const KernelParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return inputs_.size(); }

 private:
  KernelParams params_;
  std::vector<std::vector<double>> inputs_;
  std::vector<double> targets_;
  Eigen::MatrixXd chol_;  // lower Cholesky factor of K + noise I
  Eigen::VectorXd alpha_;
};

// Fits one GP per grid length scale and keeps the highest log marginal
// likelihood (first wins ties).
GaussianProcess fit_best_length_scale(const std::vector<std::vector<double>>& inputs,
                                      const std::vector<double>& targets, KernelParams base,
                                      std::span<const double> grid = kLengthScaleGrid);

// ---------------------------------------------------------------------------
// Acquisition
// ---------------------------------------------------------------------------

// (mu - f_best) Phi(z) + sigma phi(z), z = (mu - f_best) / sigma;
// max(0, mu - f_best) when sigma = 0.
double expected_improvement(double mu, double sigma, double f_best);

struct Suggestion {
  Point point;
  std::size_t candidate_index = 0;
  double ei = 0.0;
  std::vector<Point> candidates;
  std::vector<double> candidate_ei;
};

// Samples n_candidates points and returns the EI argmax (lowest index on ties).
// `f_best` is in the same units as the GP targets.
Suggestion suggest_next(const GaussianProcess& gp, const SearchSpace& space, double f_best,
                        std::size_t n_candidates, std::uint64_t seed,
                        kernels::Exec exec = kernels::Exec::parallel);

// ---------------------------------------------------------------------------
// Sweep loop
// ---------------------------------------------------------------------------

// Thrown by objectives for configurations that fail outright (e.g. diverge).
class ObjectiveFailure : public Error {
 public:
  using Error::Error;
};

// Maximized. `eval_seed` drives any noise the objective simulates.
using Objective = std::function<double(const Point& point, std::uint64_t eval_seed)>;

struct TrialRecord {
  std::size_t trial_index = 0;
  Point point;
  std::vector<double> encoded;
  std::optional<double> score;  // empty for failed trials
  std::string failure;
  bool random = true;  // drawn at random rather than suggested
  bool is_best_so_far = false;
  std::optional<double> best_so_far;
};

struct SweepOptions {
  std::size_t budget = 30;
  std::size_t init_random = 5;
  std::uint64_t seed = 0;
  std::size_t n_candidates = 512;
  KernelParams kernel{};
  bool refine_length_scale = true;
  kernels::Exec exec = kernels::Exec::parallel;
  // Called after every trial with the full history (used for persistence).
  std::function<void(const std::vector<TrialRecord>&)> on_trial;
};

std::vector<TrialRecord> run_sweep(const SearchSpace& space, const Objective& objective,
                                   const SweepOptions& options);

// trial,point,score,best_so_far with the point as a quoted JSON object.
std::string format_trials_csv(const std::vector<TrialRecord>& trials);

// ---------------------------------------------------------------------------
// Built-in synthetic objectives
// ---------------------------------------------------------------------------

struct BuiltinObjective {
  std::string name;
  SearchSpace default_space;
  Objective fn;
};

// quadratic1d, branin2d, noisy-step, simulated-fold-score.
BuiltinObjective builtin_objective(std::string_view name);
std::vector<std::string> builtin_objective_names();

// Branin-Hoo function on [-5, 10] x [0, 15]; global minimum 0.397887.
double branin(double x1, double x2);

}  // namespace stabench::hpo
