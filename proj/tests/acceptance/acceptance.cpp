// Acceptance suite. Prints one PASS/FAIL line per criterion; with arguments,
// runs only the listed criterion numbers. Exit status is non-zero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "stabench/analysis.hpp"
#include "stabench/hpo.hpp"
#include "stabench/io.hpp"
#include "stabench/metrics.hpp"
#include "stabench/report.hpp"
#include "stabench/special.hpp"
#include "stabench/stability.hpp"
#include "stabench/xai.hpp"

using namespace stabench;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fx(double v) { return fmt::format("{:.6f}", v); }

Outcome macro_consistency() {
  struct Row {
    const char* model;
    double lumen, neointima, media, macro;
  };
  // Dice rows of the LOOCV summary table.
  const Row rows[] = {{"UNet", 0.969, 0.628, 0.824, 0.807},        {"DeepLabV3+", 0.967, 0.632, 0.788, 0.796},
                      {"SegFormer", 0.974, 0.659, 0.829, 0.821},   {"SAM", 0.964, 0.627, 0.806, 0.799},
                      {"MedSAM", 0.971, 0.638, 0.801, 0.803},      {"MedSAM+UNet", 0.966, 0.501, 0.740, 0.735}};
  Outcome o;
  const std::vector<int> fg{1, 2, 3};
  for (const auto& r : rows) {
    const std::map<int, metrics::Overlap> per{{1, {r.lumen, 0.0}}, {2, {r.neointima, 0.0}}, {3, {r.media, 0.0}}};
    const double got = metrics::aggregate(per, fg).macro_dice;
    o.check(std::abs(got - r.macro) <= 0.0005,
            fmt::format("{} macro {} vs printed {} (|diff| {:.6f} > 0.0005)", r.model, fx(got), r.macro,
                        std::abs(got - r.macro)));
  }
  return o;
}

ScoreMatrix matrix(std::vector<std::string> models, std::vector<std::vector<double>> s) {
  ScoreMatrix m;
  m.models = std::move(models);
  for (std::size_t f = 0; f < s.size(); ++f) m.folds.push_back(static_cast<int>(f));
  m.scores = std::move(s);
  return m;
}

Outcome friedman_oracle() {
  Outcome o;
  const auto r = stability::friedman_test(matrix({"A", "B", "C"}, {{0.9, 0.8, 0.7}, {0.8, 0.6, 0.5}, {0.95, 0.9, 0.1}}));
  o.check(std::abs(r.statistic - 6.0) <= 1e-9, "chi2 " + fx(r.statistic));
  o.check(std::abs(r.p_value - 0.049787) <= 1e-6, "p " + fx(r.p_value));
  o.check(std::abs(r.p_value - std::exp(-3.0)) <= 1e-9, "p differs from exp(-3)");
  const auto t = stability::friedman_test(matrix({"A", "B", "C"}, {{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}, {0.9, 0.9, 0.9}}));
  o.check(t.p_value == 1.0, "tied p " + fx(t.p_value));
  return o;
}

Outcome nemenyi_cd() {
  Outcome o;
  const double cd9 = stability::nemenyi_cd(6, 9);
  o.check(std::abs(cd9 - 2.513) <= 0.001, "CD(6, 9) " + fx(cd9));
  double prev = cd9;
  for (std::size_t n : {36, 144}) {
    const double cd = stability::nemenyi_cd(6, n);
    o.check(cd < prev && cd > 0.0, fmt::format("CD(6, {}) {} not decreasing", n, fx(cd)));
    prev = cd;
  }
  o.check(stability::nemenyi_cd(6, 1000000) < 0.01, "CD does not approach 0");
  return o;
}

Outcome cohens_d() {
  Outcome o;
  const std::vector<double> a{0.8, 0.9, 1.0};
  const std::vector<double> b{0.5, 0.6, 0.7};
  const double d = stability::cohens_d(a, b).cohens_d;
  o.check(std::abs(d - 3.0) <= 1e-12, "d " + fmt::format("{:.15f}", d));
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> len(2, 12);
  int anti = 0, shift = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x(len(gen)), y(len(gen));
    for (auto& v : x) v = nd(gen);
    for (auto& v : y) v = 0.3 + 1.5 * nd(gen);
    const double dxy = stability::cohens_d(x, y).cohens_d;
    anti += std::abs(dxy + stability::cohens_d(y, x).cohens_d) <= 1e-12;
    const double c = 10.0 * nd(gen);
    for (auto& v : x) v += c;
    for (auto& v : y) v += c;
    shift += std::abs(dxy - stability::cohens_d(x, y).cohens_d) <= 1e-9;
  }
  o.check(anti == 1000, fmt::format("antisymmetry held in {}/1000", anti));
  o.check(shift == 1000, fmt::format("shift invariance held in {}/1000", shift));
  return o;
}

Outcome bootstrap() {
  Outcome o;
  const std::vector<double> flat(9, 0.8);
  const auto c = stability::bootstrap_ci(flat, 0.95, 10000, 1);
  o.check(c.lower == 0.8 && c.upper == 0.8, "constant input CI " + fx(c.lower) + ".." + fx(c.upper));

  const std::vector<double> x{0.61, 0.75, 0.58, 0.93, 0.71, 0.66, 0.8, 0.52, 0.77};
  const auto r1 = stability::bootstrap_ci(x, 0.95, 10000, 42);
  const auto r2 = stability::bootstrap_ci(x, 0.95, 10000, 42);
  o.check(r1.lower == r2.lower && r1.upper == r2.upper, "seed 42 runs differ");
  const auto s = stability::bootstrap_ci(x, 0.95, 10000, 42, kernels::Exec::serial);
  o.check(s.lower == r1.lower && s.upper == r1.upper, "serial and parallel differ");

  // 500 normal samples of size 50 with true mean 0.7.
  SplitMix64 rng(7);
  int covered = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> sample(50);
    for (auto& v : sample) v = 0.7 + 0.1 * rng.normal();
    const auto ci = stability::bootstrap_ci(sample, 0.95, 10000, stream_seed(1234, rep));
    covered += ci.lower <= 0.7 && 0.7 <= ci.upper;
  }
  const double rate = covered / 500.0;
  o.check(rate >= 0.92 && rate <= 0.98, fmt::format("coverage {:.3f}", rate));
  if (o.pass) o.detail = fmt::format("coverage {:.3f}", rate);
  return o;
}

Outcome ei_closed_forms() {
  Outcome o;
  o.check(hpo::expected_improvement(0.3, 0.0, 0.3) == 0.0, "sigma 0 at incumbent");
  o.check(hpo::expected_improvement(0.8, 0.0, 0.3) == 0.5, "sigma 0 above incumbent");
  o.check(hpo::expected_improvement(-0.2, 0.0, 0.3) == 0.0, "sigma 0 below incumbent");
  o.check(std::abs(special::normal_pdf(0.0) - 0.398942) <= 1e-6, "phi(0)");
  o.check(std::abs(hpo::expected_improvement(0.0, 1.0, 0.0) - 0.398942) <= 1e-6, "EI(mu = f+, sigma 1)");
  o.check(std::abs(hpo::expected_improvement(0.5, 1.0, 0.0) - 0.697796) <= 1e-5, "EI(0.5, 1)");
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::exponential_distribution<double> ex(0.5);
  int negative = 0;
  for (int i = 0; i < 100000; ++i) negative += hpo::expected_improvement(nd(gen), ex(gen), nd(gen)) < 0.0;
  o.check(negative == 0, fmt::format("{} negative EI values", negative));
  return o;
}

Outcome gp_interpolation() {
  Outcome o;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 5; ++i) {
    xs.push_back({u(gen), u(gen), u(gen)});
    ys.push_back(u(gen) * 4.0 - 2.0);
  }
  hpo::GaussianProcess gp({0.3, 1.0, 0.0});
  gp.fit(xs, ys);
  for (int i = 0; i < 5; ++i) {
    const auto p = gp.posterior(xs[i]);
    o.check(std::abs(p.mu - ys[i]) <= 1e-6, fmt::format("mu error {:.3g} at point {}", std::abs(p.mu - ys[i]), i));
    o.check(p.sigma <= 1e-4, fmt::format("sigma {:.3g} at point {}", p.sigma, i));
  }
  return o;
}

Outcome bo_efficacy() {
  const auto obj = hpo::builtin_objective("branin2d");
  int wins = 0;
  for (int r = 0; r < 20; ++r) {
    hpo::SweepOptions bo;
    bo.budget = 40;
    bo.init_random = 5;
    bo.seed = 5000 + r;
    hpo::SweepOptions rs = bo;
    rs.init_random = 40;
    const auto best = [](const std::vector<hpo::TrialRecord>& t) { return *t.back().best_so_far; };
    wins += best(hpo::run_sweep(obj.default_space, obj.fn, bo)) > best(hpo::run_sweep(obj.default_space, obj.fn, rs));
  }
  Outcome o;
  o.check(wins >= 16, fmt::format("BO won {}/20", wins));
  if (o.pass) o.detail = fmt::format("BO won {}/20", wins);
  return o;
}

Outcome xai_suite() {
  Outcome o;
  const ProbMap probs(1, 2, 4, {1, 0, 0, 0, 0.25, 0.25, 0.25, 0.25});
  const auto h = xai::entropy_bits(probs);
  o.check(h[0] == 0.0, "one-hot entropy " + fx(h[0]));
  o.check(std::abs(h[1] - 2.0) <= 1e-12, "uniform entropy " + fx(h[1]));

  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> lab(0, 3);
  std::vector<int> a(256), b(256);
  for (auto& v : a) v = lab(gen);
  for (auto& v : b) v = lab(gen);
  const LabelMask ma(16, 16, 4, a), mb(16, 16, 4, b);
  o.check(xai::error_map(ma, mb).values == xai::error_map(mb, ma).values, "error map not symmetric");

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<xai::ExplanationMap> layers;
  for (int l = 0; l < 5; ++l) {
    xai::ExplanationMap m{16, 16, std::vector<double>(256), xai::Layer::composite};
    for (auto& v : m.values) v = u(gen);
    layers.push_back(m);
  }
  int invariant = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> w(5), scaled(5);
    for (auto& v : w) v = u(gen);
    const double c = std::exp(8.0 * u(gen) - 4.0);
    for (int i = 0; i < 5; ++i) scaled[i] = w[i] * c;
    const auto x = xai::composite_map(layers, w);
    const auto y = xai::composite_map(layers, scaled);
    bool same = true;
    for (std::size_t i = 0; i < x.values.size(); ++i) same &= std::abs(x.values[i] - y.values[i]) <= 1e-12;
    invariant += same;
  }
  o.check(invariant == 100, fmt::format("rescaling invariance held in {}/100", invariant));

  for (int rep = 0; rep < 10; ++rep) {
    std::vector<xai::ExplanationMap> folds;
    const int n = 2 + rep % 7;
    for (int f = 0; f < n; ++f) {
      xai::ExplanationMap m{16, 16, std::vector<double>(256), xai::Layer::uncertainty};
      for (auto& v : m.values) v = u(gen);
      folds.push_back(m);
    }
    const auto st = xai::uncertainty_stability(folds);
    double worst = 0.0;
    for (std::size_t p = 0; p < 256; ++p) {
      long double mean = 0.0L;
      for (const auto& f : folds) mean += f.values[p];
      mean /= n;
      long double var = 0.0L;
      for (const auto& f : folds) var += (f.values[p] - mean) * (f.values[p] - mean);
      var /= n;
      worst = std::max({worst, std::abs(st.mean_map.values[p] - static_cast<double>(mean)),
                        std::abs(st.variance_map[p] - static_cast<double>(var))});
    }
    o.check(worst <= 1e-12, fmt::format("stability error {:.3g} with {} folds", worst, n));
  }
  return o;
}

Outcome winner_flip() {
  Outcome o;
  const auto dir = std::filesystem::path(STABENCH_SOURCE_DIR) / "data" / "fixtures";
  const stability::ProtocolTables tables{{"loocv", io::read_score_table(dir / "flip_loocv.csv")},
                                         {"kfold3", io::read_score_table(dir / "flip_kfold3.csv")}};
  const auto report = analysis::analyze(tables);
  bool flipped = false;
  for (const auto& f : report.instability.flips) flipped |= f.metric == "dice" && f.class_id == "macro" && f.flipped;
  o.check(flipped, "no dice/macro winner flip");

  const auto& loocv = report.rankings.front();
  bool connected = false;
  std::size_t bars = 0;
  if (loocv.nemenyi) {
    for (const auto& c : loocv.nemenyi->cliques) {
      bars += c.size() >= 2;
      connected |= c.size() >= 2 && std::find(c.begin(), c.end(), "A") != c.end() &&
                   std::find(c.begin(), c.end(), "B") != c.end();
    }
    o.check(!loocv.nemenyi->pairwise_significant.at({"A", "B"}), "A and B significantly different");
  }
  o.check(connected, "A and B not connected by a clique");

  const auto svg1 = report::render_cd_diagram(*loocv.friedman, *loocv.nemenyi).to_string();
  std::size_t drawn = 0;
  for (auto p = svg1.find("class=\"clique-bar\""); p != std::string::npos; p = svg1.find("class=\"clique-bar\"", p + 1))
    ++drawn;
  o.check(drawn == bars && bars > 0, fmt::format("{} clique bars drawn for {} cliques", drawn, bars));

  const auto again = analysis::analyze(tables);
  const auto r1 = report::render_all(report);
  const auto r2 = report::render_all(again);
  o.check(r1.cd_diagram.to_string() == r2.cd_diagram.to_string() && r1.forest.to_string() == r2.forest.to_string() &&
              r1.trajectories.to_string() == r2.trajectories.to_string() &&
              r1.effect_grid.to_string() == r2.effect_grid.to_string(),
          "SVG differs across runs");
  return o;
}

Outcome metric_identity() {
  Outcome o;
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> size(1, 24);
  std::uniform_int_distribution<int> classes(2, 5);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int h = size(gen), w = size(gen), k = classes(gen);
    std::uniform_int_distribution<int> lab(0, k - 1);
    std::vector<int> a(static_cast<std::size_t>(h) * w), b(a.size());
    for (auto& v : a) v = lab(gen);
    for (auto& v : b) v = lab(gen);
    const LabelMask p(h, w, k, a), g(h, w, k, b);
    for (int c = 0; c < k; ++c) {
      const auto ov = metrics::overlap_per_class(p, g, c);
      worst = std::max(worst, std::abs(ov.iou - ov.dice / (2.0 - ov.dice)));
    }
  }
  o.check(worst <= 1e-12, fmt::format("max deviation {:.3g}", worst));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "macro consistency", 1.0, macro_consistency}, {2, "friedman oracle", 1.0, friedman_oracle},
      {3, "nemenyi critical difference", 1.0, nemenyi_cd}, {4, "cohen's d", 5.0, cohens_d},
      {5, "bootstrap", 60.0, bootstrap},                  {6, "expected improvement", 5.0, ei_closed_forms},
      {7, "gp interpolation", 1.0, gp_interpolation},     {8, "bo efficacy", 120.0, bo_efficacy},
      {9, "xai suite", 10.0, xai_suite},                  {10, "winner flip end to end", 10.0, winner_flip},
      {11, "metric identity", 10.0, metric_identity}};
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.check(false, fmt::format("runtime over budget"));
    failures += !o.pass;
    std::printf("%s criterion %2d %-28s %8.3fs (budget %gs)%s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_s, o.detail.empty() ? "" : "  ", o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
