#include "stabench/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "stabench/io.hpp"
#include "stabench/rng.hpp"

namespace stabench::hpo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ParamValue value_from_json(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw Error(fmt::format("categorical value {} must be a number or string", v.dump()));
}

nlohmann::json value_to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

double require_number(const Point& point, const std::string& name) {
  const auto it = point.find(name);
  if (it == point.end()) throw Error(fmt::format("objective needs dimension '{}'", name));
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw Error(fmt::format("dimension '{}' must be numeric", name));
}

std::string require_string(const Point& point, const std::string& name) {
  const auto it = point.find(name);
  if (it == point.end()) throw Error(fmt::format("objective needs dimension '{}'", name));
  return format_value(it->second);
}

}  // namespace

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  std::set<std::string> names;
  for (const auto& d : dims_) {
    if (d.name.empty()) throw Error("search dimension without a name");
    if (!names.insert(d.name).second) throw Error(fmt::format("duplicate search dimension '{}'", d.name));
    std::visit(Overloaded{
                   [&](const Uniform& u) {
                     if (!(u.lo < u.hi)) throw Error(fmt::format("dimension '{}': need lo < hi", d.name));
                   },
                   [&](const LogUniform& u) {
                     if (!(u.lo > 0.0 && u.lo < u.hi)) {
                       throw Error(fmt::format("dimension '{}': need 0 < lo < hi", d.name));
                     }
                   },
                   [&](const Categorical& c) {
                     if (c.values.empty()) throw Error(fmt::format("dimension '{}': no values", d.name));
                     std::set<ParamValue> seen(c.values.begin(), c.values.end());
                     if (seen.size() != c.values.size()) {
                       throw Error(fmt::format("dimension '{}': duplicate values", d.name));
                     }
                   },
               },
               d.kind);
  }
}

std::size_t SearchSpace::encoded_size() const noexcept {
  std::size_t n = 0;
  for (const auto& d : dims_) {
    n += std::holds_alternative<Categorical>(d.kind) ? std::get<Categorical>(d.kind).values.size() : 1;
  }
  return n;
}

SearchSpace SearchSpace::from_json(const nlohmann::json& j) {
  try {
    std::vector<Dimension> dims;
    for (const auto& dj : j.at("dims")) {
      Dimension d;
      d.name = dj.at("name").get<std::string>();
      const auto kind = dj.at("kind").get<std::string>();
      if (kind == "uniform") {
        d.kind = Uniform{dj.at("lo").get<double>(), dj.at("hi").get<double>()};
      } else if (kind == "log_uniform") {
        d.kind = LogUniform{dj.at("lo").get<double>(), dj.at("hi").get<double>()};
      } else if (kind == "categorical") {
        Categorical c;
        for (const auto& v : dj.at("values")) c.values.push_back(value_from_json(v));
        d.kind = std::move(c);
      } else {
        throw Error(fmt::format("unknown dimension kind '{}'", kind));
      }
      dims.push_back(std::move(d));
    }
    return SearchSpace(std::move(dims));
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed search space JSON: {}", e.what()));
  }
}

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : dims_) {
    nlohmann::json dj{{"name", d.name}};
    std::visit(Overloaded{
                   [&](const Uniform& u) {
                     dj["kind"] = "uniform";
                     dj["lo"] = u.lo;
                     dj["hi"] = u.hi;
                   },
                   [&](const LogUniform& u) {
                     dj["kind"] = "log_uniform";
                     dj["lo"] = u.lo;
                     dj["hi"] = u.hi;
                   },
                   [&](const Categorical& c) {
                     dj["kind"] = "categorical";
                     dj["values"] = nlohmann::json::array();
                     for (const auto& v : c.values) dj["values"].push_back(value_to_json(v));
                   },
               },
               d.kind);
    dims.push_back(std::move(dj));
  }
  return {{"dims", dims}};
}

nlohmann::json point_to_json(const Point& point) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, v] : point) j[name] = value_to_json(v);
  return j;
}

std::string format_value(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return io::format_double(std::get<double>(v));
}

std::vector<double> encode(const SearchSpace& space, const Point& point) {
  std::vector<double> out;
  out.reserve(space.encoded_size());
  for (const auto& d : space.dims()) {
    const auto it = point.find(d.name);
    if (it == point.end()) throw Error(fmt::format("point has no value for '{}'", d.name));
    const auto& value = it->second;
    std::visit(Overloaded{
                   [&](const Uniform& u) {
                     const auto* x = std::get_if<double>(&value);
                     if (!x || *x < u.lo || *x > u.hi) throw Error(fmt::format("illegal value for '{}'", d.name));
                     out.push_back((*x - u.lo) / (u.hi - u.lo));
                   },
                   [&](const LogUniform& u) {
                     const auto* x = std::get_if<double>(&value);
                     if (!x || *x < u.lo || *x > u.hi) throw Error(fmt::format("illegal value for '{}'", d.name));
                     out.push_back(std::clamp((std::log(*x) - std::log(u.lo)) / (std::log(u.hi) - std::log(u.lo)),
                                              0.0, 1.0));
                   },
                   [&](const Categorical& c) {
                     const auto pos = std::find(c.values.begin(), c.values.end(), value);
                     if (pos == c.values.end()) throw Error(fmt::format("illegal value for '{}'", d.name));
                     for (auto v = c.values.begin(); v != c.values.end(); ++v) out.push_back(v == pos ? 1.0 : 0.0);
                   },
               },
               d.kind);
  }
  return out;
}

std::vector<Point> sample_space(const SearchSpace& space, std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p;
    for (const auto& d : space.dims()) {
      std::visit(Overloaded{
                     [&](const Uniform& u) { p[d.name] = u.lo + rng.uniform() * (u.hi - u.lo); },
                     [&](const LogUniform& u) {
                       const double lo = std::log(u.lo);
                       const double hi = std::log(u.hi);
                       p[d.name] = std::clamp(std::exp(lo + rng.uniform() * (hi - lo)), u.lo, u.hi);
                     },
                     [&](const Categorical& c) { p[d.name] = c.values[rng.below(c.values.size())]; },
                 },
                 d.kind);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double rbf(const KernelParams& params, std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return params.amplitude * std::exp(-d2 / (2.0 * params.length_scale * params.length_scale));
}

GaussianProcess::GaussianProcess(KernelParams params) : params_(params) {
  if (!(params.length_scale > 0.0) || !(params.amplitude > 0.0) || !(params.noise >= 0.0)) {
    throw Error("kernel needs length_scale > 0, amplitude > 0 and noise >= 0");
  }
}

void GaussianProcess::fit(std::vector<std::vector<double>> inputs, std::vector<double> targets) {
  if (inputs.size() != targets.size()) throw Error("GP inputs and targets differ in length");
  const auto n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = rbf(params_, inputs[i], inputs[j]);
    }
    k(i, i) += params_.noise;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw NumericError("kernel matrix is not positive definite; increase the noise variance");
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  chol_ = llt.matrixL();
  alpha_ = llt.solve(y);
  inputs_ = std::move(inputs);
  targets_ = std::move(targets);
}

Posterior GaussianProcess::posterior(std::span<const double> x) const {
  if (inputs_.empty()) return {0.0, std::sqrt(params_.amplitude)};
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = rbf(params_, inputs_[i], x);
  const double mu = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double var = std::max(0.0, params_.amplitude - v.squaredNorm());
  return {mu, std::sqrt(var)};
}

double GaussianProcess::log_marginal_likelihood() const {
  if (inputs_.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets_.data(), n);
  return -0.5 * y.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GaussianProcess fit_best_length_scale(const std::vector<std::vector<double>>& inputs,
                                      const std::vector<double>& targets, KernelParams base,
                                      std::span<const double> grid) {
  std::optional<GaussianProcess> best;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ell : grid) {
    KernelParams p = base;
    p.length_scale = ell;
    GaussianProcess gp(p);
    try {
      gp.fit(inputs, targets);
    } catch (const NumericError&) {
      continue;
    }
    const double lml = gp.log_marginal_likelihood();
    if (!best || lml > best_lml) {
      best_lml = lml;
      best = std::move(gp);
    }
  }
  if (!best) throw NumericError("no length scale gave a positive definite kernel matrix");
  return *std::move(best);
}

double expected_improvement(double mu, double sigma, double f_best) {
  return kernels::expected_improvement(mu, sigma, f_best);
}

Suggestion suggest_next(const GaussianProcess& gp, const SearchSpace& space, double f_best,
                        std::size_t n_candidates, std::uint64_t seed, kernels::Exec exec) {
  if (n_candidates < 1) throw Error("need at least one candidate");
  Suggestion s;
  s.candidates = sample_space(space, seed, n_candidates);
  std::vector<double> mu(n_candidates);
  std::vector<double> sigma(n_candidates);
  for (std::size_t i = 0; i < n_candidates; ++i) {
    const auto post = gp.posterior(encode(space, s.candidates[i]));
    mu[i] = post.mu;
    sigma[i] = post.sigma;
  }
  s.candidate_ei.resize(n_candidates);
  kernels::expected_improvement(mu, sigma, f_best, s.candidate_ei, exec);
  // max_element returns the first maximum, which is the lowest-index tie rule.
  const auto best = std::max_element(s.candidate_ei.begin(), s.candidate_ei.end());
  s.candidate_index = static_cast<std::size_t>(best - s.candidate_ei.begin());
  s.ei = *best;
  s.point = s.candidates[s.candidate_index];
  return s;
}

std::vector<TrialRecord> run_sweep(const SearchSpace& space, const Objective& objective,
                                   const SweepOptions& options) {
  if (options.init_random < 1 || options.budget < options.init_random) {
    throw Error(fmt::format("sweep needs budget >= init_random >= 1 (budget {}, init {})", options.budget,
                            options.init_random));
  }
  std::vector<TrialRecord> trials;
  std::optional<double> best;
  for (std::size_t t = 0; t < options.budget; ++t) {
    const std::uint64_t draw_seed = stream_seed(options.seed, 2 * t);
    const std::uint64_t eval_seed = stream_seed(options.seed, 2 * t + 1);

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (const auto& tr : trials) {
      if (tr.score) {
        xs.push_back(tr.encoded);
        ys.push_back(*tr.score);
      }
    }

    TrialRecord rec;
    rec.trial_index = t;
    if (t < options.init_random || xs.empty()) {
      rec.point = sample_space(space, draw_seed, 1).front();
    } else {
      // Standardize the targets; f_best is converted with the same transform.
      double mean = 0.0;
      for (double y : ys) mean += y;
      mean /= static_cast<double>(ys.size());
      double var = 0.0;
      for (double y : ys) var += (y - mean) * (y - mean);
      const double sd = ys.size() > 1 && var > 0.0 ? std::sqrt(var / static_cast<double>(ys.size() - 1)) : 1.0;
      std::vector<double> zs(ys.size());
      for (std::size_t i = 0; i < ys.size(); ++i) zs[i] = (ys[i] - mean) / sd;

      KernelParams kernel = options.kernel;
      std::optional<GaussianProcess> gp;
      for (int attempt = 0; attempt < 6 && !gp; ++attempt, kernel.noise = std::max(kernel.noise * 10.0, 1e-10)) {
        try {
          if (options.refine_length_scale) {
            gp = fit_best_length_scale(xs, zs, kernel);
          } else {
            GaussianProcess g(kernel);
            g.fit(xs, zs);
            gp = std::move(g);
          }
        } catch (const NumericError&) {
        }
      }
      if (!gp) throw NumericError("GP fit failed even after raising the noise variance");
      rec.point = suggest_next(*gp, space, (*best - mean) / sd, options.n_candidates, draw_seed, options.exec).point;
      rec.random = false;
    }
    rec.encoded = encode(space, rec.point);

    try {
      const double score = objective(rec.point, eval_seed);
      if (!std::isfinite(score)) throw ObjectiveFailure("objective returned a non-finite score");
      rec.score = score;
      if (!best || score > *best) {
        best = score;
        rec.is_best_so_far = true;
      }
    } catch (const ObjectiveFailure& e) {
      rec.failure = e.what();
    }
    rec.best_so_far = best;
    trials.push_back(std::move(rec));
    if (options.on_trial) options.on_trial(trials);
  }
  return trials;
}

std::string format_trials_csv(const std::vector<TrialRecord>& trials) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out = "trial,point,score,best_so_far\n";
  for (const auto& t : trials) {
    out += fmt::format("{},{},{},{}\n", t.trial_index, quote(point_to_json(t.point).dump()),
                       t.score ? io::format_double(*t.score) : std::string(),
                       t.best_so_far ? io::format_double(*t.best_so_far) : std::string());
  }
  return out;
}

double branin(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  constexpr double b = 5.1 / (4.0 * pi * pi);
  constexpr double c = 5.0 / pi;
  constexpr double t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

std::vector<std::string> builtin_objective_names() {
  return {"quadratic1d", "branin2d", "noisy-step", "simulated-fold-score"};
}

BuiltinObjective builtin_objective(std::string_view name) {
  if (name == "quadratic1d") {
    return {"quadratic1d", SearchSpace({{"x", Uniform{0.0, 1.0}}}), [](const Point& p, std::uint64_t) {
              const double x = require_number(p, "x");
              return -(x - 0.3) * (x - 0.3);
            }};
  }
  if (name == "branin2d") {
    return {"branin2d", SearchSpace({{"x1", Uniform{-5.0, 10.0}}, {"x2", Uniform{0.0, 15.0}}}),
            [](const Point& p, std::uint64_t) { return -branin(require_number(p, "x1"), require_number(p, "x2")); }};
  }
  if (name == "noisy-step") {
    return {"noisy-step", SearchSpace({{"x", Uniform{0.0, 1.0}}}), [](const Point& p, std::uint64_t seed) {
              SplitMix64 rng(seed);
              return (require_number(p, "x") >= 0.6 ? 1.0 : 0.0) + 0.1 * rng.normal();
            }};
  }
  if (name == "simulated-fold-score") {
    SearchSpace space({
        {"learning_rate", LogUniform{1e-5, 1e-2}},
        {"batch_size", Categorical{{2.0, 4.0, 8.0, 16.0, 32.0}}},
        {"optimizer", Categorical{{"Adam", "AdamW", "SGD", "RMSprop", "Nadam"}}},
        {"weight_decay", LogUniform{1e-6, 1e-2}},
        {"dropout", Uniform{0.0, 0.3}},
    });
    // A smooth synthetic "macro Dice" surface; each evaluation averages three
    // folds with independent noise, and SGD with a large step diverges.
    return {"simulated-fold-score", std::move(space), [](const Point& p, std::uint64_t seed) {
              const double lr = require_number(p, "learning_rate");
              const double batch = require_number(p, "batch_size");
              const std::string opt = require_string(p, "optimizer");
              const double wd = require_number(p, "weight_decay");
              const double dropout = require_number(p, "dropout");
              if (opt == "SGD" && lr > 3e-3) throw ObjectiveFailure("training diverged");
              const std::map<std::string, double> bonus{
                  {"Adam", 0.0}, {"AdamW", 0.01}, {"SGD", -0.05}, {"RMSprop", -0.02}, {"Nadam", 0.005}};
              const auto it = bonus.find(opt);
              const double lr_term = std::log10(lr) + 3.5;
              const double wd_term = std::log10(wd) + 4.0;
              const double base = 0.82 - 0.04 * lr_term * lr_term - 0.5 * (dropout - 0.1) * (dropout - 0.1) -
                                  0.01 * std::abs(std::log2(batch) - 3.0) - 0.005 * wd_term * wd_term +
                                  (it == bonus.end() ? 0.0 : it->second);
              SplitMix64 rng(seed);
              double sum = 0.0;
              for (int fold = 0; fold < 3; ++fold) sum += base + 0.02 * rng.normal();
              return std::clamp(sum / 3.0, 0.0, 1.0);
            }};
  }
  throw Error(fmt::format("unknown builtin objective '{}'", name));
}

}  // namespace stabench::hpo
