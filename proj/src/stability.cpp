#include "stabench/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "stabench/error.hpp"
#include "stabench/special.hpp"

namespace stabench::stability {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// Demsar (2006), Table 5: studentized range statistic at infinite degrees of
// freedom divided by sqrt(2), for k = 2..10 groups.
constexpr std::array<double, 9> kQ05 = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
constexpr std::array<double, 9> kQ10 = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};

}  // namespace

BootstrapCI bootstrap_ci(std::span<const double> scores, double level, std::size_t n_resamples,
                         std::uint64_t seed, kernels::Exec exec) {
  if (scores.empty()) throw Error("bootstrap of an empty score list");
  if (!(level > 0.0 && level < 1.0)) throw Error(fmt::format("confidence level {} outside (0, 1)", level));
  if (n_resamples == 0) throw Error("bootstrap needs at least one resample");

  BootstrapCI ci;
  ci.level = level;
  ci.n_resamples = n_resamples;
  ci.seed = seed;
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  if (*lo_it == *hi_it) {
    // Summation rounding would otherwise move a constant sample off its value.
    ci.mean = ci.lower = ci.upper = *lo_it;
    return ci;
  }

  std::vector<double> means(n_resamples);
  kernels::bootstrap_means(scores, seed, means, exec);
  std::sort(means.begin(), means.end());

  ci.mean = mean_of(scores);
  ci.lower = std::min(percentile(means, (1.0 - level) / 2.0), ci.mean);
  ci.upper = std::max(percentile(means, 1.0 - (1.0 - level) / 2.0), ci.mean);
  return ci;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("percentile of an empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> rank_descending(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<std::vector<double>> fold_ranks(const ScoreMatrix& matrix) {
  std::vector<std::vector<double>> out;
  out.reserve(matrix.scores.size());
  for (const auto& row : matrix.scores) out.push_back(rank_descending(row));
  return out;
}

std::map<std::string, double> FriedmanResult::mean_rank_map() const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < models.size(); ++j) out[models[j]] = mean_ranks[j];
  return out;
}

FriedmanResult friedman_test(const ScoreMatrix& matrix, bool exact) {
  const std::size_t k = matrix.models.size();
  const std::size_t n = matrix.scores.size();
  if (k < 2) throw Error(fmt::format("Friedman test needs at least 2 models, got {}", k));
  if (n < 2) throw Error(fmt::format("Friedman test needs at least 2 folds, got {}", n));

  const auto ranks = fold_ranks(matrix);
  FriedmanResult r;
  r.models = matrix.models;
  r.n_folds = n;
  r.dof = static_cast<int>(k) - 1;
  r.mean_ranks.assign(k, 0.0);
  double ties = 0.0;
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t j = 0; j < k; ++j) r.mean_ranks[j] += ranks[f][j];
    std::map<double, int> groups;
    for (double v : matrix.scores[f]) ++groups[v];
    for (const auto& [value, t] : groups) ties += static_cast<double>(t) * t * t - t;
  }
  for (auto& m : r.mean_ranks) m /= static_cast<double>(n);

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  double spread = 0.0;
  for (double m : r.mean_ranks) spread += (m - (kd + 1.0) / 2.0) * (m - (kd + 1.0) / 2.0);
  const double raw = 12.0 * nd / (kd * (kd + 1.0)) * spread;

  const double correction = 1.0 - ties / (nd * kd * (kd * kd - 1.0));
  if (correction <= 1e-12) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.degenerate = true;
    r.tie_corrected = true;
    if (exact && k * n <= kExactFriedmanLimit) r.exact_p_value = 1.0;
    return r;
  }
  r.tie_corrected = ties > 0.0;
  r.statistic = raw / correction;
  r.p_value = std::clamp(special::chi2_sf(r.statistic, r.dof), 0.0, 1.0);
  if (exact && k * n <= kExactFriedmanLimit) r.exact_p_value = friedman_exact_p(ranks);
  return r;
}

FriedmanResult friedman_test(const ScoreTable& table, const std::string& metric, const std::string& class_id,
                             bool exact) {
  return friedman_test(table.matrix(metric, class_id), exact);
}

double friedman_exact_p(const std::vector<std::vector<double>>& ranks) {
  if (ranks.empty()) throw Error("exact Friedman test needs at least one fold");
  const std::size_t k = ranks.front().size();
  // Distinct arrangements of each fold's rank multiset are equally likely
  // under the null, so enumerating them uniformly gives the exact law.
  std::vector<std::vector<std::vector<double>>> arrangements;
  for (const auto& fold : ranks) {
    std::vector<double> perm = fold;
    std::sort(perm.begin(), perm.end());
    auto& list = arrangements.emplace_back();
    do list.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  }

  // The tie-correction factor is permutation invariant, so the sum of squared
  // rank totals orders outcomes exactly like the statistic.
  auto sum_sq = [](const std::vector<double>& totals) {
    double s = 0.0;
    for (double t : totals) s += t * t;
    return s;
  };
  std::vector<double> observed(k, 0.0);
  for (const auto& fold : ranks) {
    for (std::size_t j = 0; j < k; ++j) observed[j] += fold[j];
  }
  const double threshold = sum_sq(observed) - 1e-9;

  std::size_t hits = 0;
  std::size_t total = 0;
  std::vector<double> totals(k, 0.0);
  auto recurse = [&](auto&& self, std::size_t fold) -> void {
    if (fold == arrangements.size()) {
      ++total;
      if (sum_sq(totals) >= threshold) ++hits;
      return;
    }
    for (const auto& arr : arrangements[fold]) {
      for (std::size_t j = 0; j < k; ++j) totals[j] += arr[j];
      self(self, fold + 1);
      for (std::size_t j = 0; j < k; ++j) totals[j] -= arr[j];
    }
  };
  recurse(recurse, 0);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double q_alpha(int k, double alpha) {
  if (k < 2 || k > 10) throw Error(fmt::format("no Nemenyi constant for k = {} (supported 2..10)", k));
  if (std::abs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
  throw Error(fmt::format("no Nemenyi constant for alpha = {} (supported 0.05, 0.10)", alpha));
}

double nemenyi_cd(int k, std::size_t n_folds, double alpha) {
  if (n_folds < 1) throw Error("Nemenyi CD needs at least one fold");
  const double kd = k;
  return q_alpha(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_folds)));
}

std::vector<Clique> cd_cliques(const std::map<std::string, double>& mean_ranks, double cd) {
  if (!(cd > 0.0)) throw Error("critical difference must be positive");
  std::vector<std::pair<std::string, double>> order(mean_ranks.begin(), mean_ranks.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  std::vector<Clique> cliques;
  std::size_t reach = 0;  // one past the furthest model covered so far
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t j = i;
    while (j + 1 < order.size() && order[j + 1].second - order[i].second <= cd) ++j;
    if (j + 1 <= reach) continue;  // contained in the previous clique
    Clique c;
    for (std::size_t t = i; t <= j; ++t) c.push_back(order[t].first);
    cliques.push_back(std::move(c));
    reach = j + 1;
  }
  return cliques;
}

NemenyiResult nemenyi(const FriedmanResult& friedman, double alpha) {
  NemenyiResult r;
  r.alpha = alpha;
  const int k = static_cast<int>(friedman.models.size());
  r.q_alpha = q_alpha(k, alpha);
  r.critical_difference = nemenyi_cd(k, friedman.n_folds, alpha);
  for (std::size_t a = 0; a < friedman.models.size(); ++a) {
    for (std::size_t b = a + 1; b < friedman.models.size(); ++b) {
      auto key = std::minmax(friedman.models[a], friedman.models[b]);
      r.pairwise_significant[{key.first, key.second}] =
          std::abs(friedman.mean_ranks[a] - friedman.mean_ranks[b]) > r.critical_difference;
    }
  }
  r.cliques = cd_cliques(friedman.mean_rank_map(), r.critical_difference);
  return r;
}

std::string_view to_string(Magnitude m) {
  switch (m) {
    case Magnitude::negligible: return "negligible";
    case Magnitude::small: return "small";
    case Magnitude::medium: return "medium";
    case Magnitude::large: return "large";
  }
  return "negligible";
}

Magnitude magnitude_from_string(std::string_view s) {
  if (s == "negligible") return Magnitude::negligible;
  if (s == "small") return Magnitude::small;
  if (s == "medium") return Magnitude::medium;
  if (s == "large") return Magnitude::large;
  throw Error(fmt::format("unknown effect magnitude '{}'", s));
}

Magnitude magnitude_of(double d) {
  const double a = std::abs(d);
  if (a >= 0.8) return Magnitude::large;
  if (a >= 0.5) return Magnitude::medium;
  if (a >= 0.2) return Magnitude::small;
  return Magnitude::negligible;
}

EffectSize cohens_d(std::span<const double> a, std::span<const double> b, EffectVariant variant) {
  if (a.size() < 2 || b.size() < 2) throw Error("Cohen's d needs at least 2 values per group");
  double diff = 0.0;
  double scale = 0.0;
  if (variant == EffectVariant::paired) {
    if (a.size() != b.size()) throw Error("paired Cohen's d needs equal-length samples");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    diff = mean_of(d);
    scale = std::sqrt(sample_variance(d, diff));
  } else {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    diff = ma - mb;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled =
        ((na - 1.0) * sample_variance(a, ma) + (nb - 1.0) * sample_variance(b, mb)) / (na + nb - 2.0);
    scale = std::sqrt(pooled);
  }
  if (scale == 0.0) {
    if (diff != 0.0) throw Error("infinite effect: zero pooled standard deviation with unequal means");
    return {};
  }
  const double d = diff / scale;
  return {d, magnitude_of(d)};
}

RankStats rank_stats(std::span<const double> trajectory) {
  if (trajectory.empty()) throw Error("rank statistics of an empty trajectory");
  RankStats s;
  s.trajectory.assign(trajectory.begin(), trajectory.end());
  s.mean_rank = mean_of(trajectory);
  const auto [lo, hi] = std::minmax_element(trajectory.begin(), trajectory.end());
  s.range = *hi - *lo;
  s.std = trajectory.size() > 1 ? std::sqrt(sample_variance(trajectory, s.mean_rank)) : 0.0;
  const double n = static_cast<double>(trajectory.size());
  s.top1_pct = 100.0 * static_cast<double>(std::count_if(trajectory.begin(), trajectory.end(),
                                                         [](double r) { return r <= 1.0; })) / n;
  s.top2_pct = 100.0 * static_cast<double>(std::count_if(trajectory.begin(), trajectory.end(),
                                                         [](double r) { return r <= 2.0; })) / n;
  return s;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("Spearman correlation needs equal-length inputs");
  if (a.size() < 2) throw Error("Spearman correlation needs at least 2 values");
  const auto ra = rank_descending(a);
  const auto rb = rank_descending(b);
  const double ma = mean_of(ra);
  const double mb = mean_of(rb);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error("Spearman correlation undefined for a constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

InstabilityReport instability_table(const ProtocolTables& tables, const std::vector<std::string>& metrics) {
  InstabilityReport report;
  std::set<std::string> wanted(metrics.begin(), metrics.end());
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::string, std::string>>> winners;

  for (const auto& [protocol, table] : tables) {
    std::set<std::string> seen;
    for (const auto& [metric, cls] : table.slices()) {
      if (!wanted.empty() && !wanted.count(metric)) continue;
      seen.insert(metric);
      const auto m = table.matrix(metric, cls);
      SliceInstability s;
      s.protocol = protocol;
      s.metric = metric;
      s.class_id = cls;
      s.highest = -std::numeric_limits<double>::infinity();
      s.lowest = std::numeric_limits<double>::infinity();
      s.winner_mean = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m.models.size(); ++j) {
        const auto col = m.column(j);
        const double mu = mean_of(col);
        if (mu > s.winner_mean) {
          s.winner_mean = mu;
          s.winner = m.models[j];
          s.tied_winners.clear();
        } else if (mu == s.winner_mean) {
          s.tied_winners.push_back(m.models[j]);
        }
        for (double v : col) {
          if (v > s.highest) {
            s.highest = v;
            s.highest_model = m.models[j];
          }
          if (v < s.lowest) {
            s.lowest = v;
            s.lowest_model = m.models[j];
          }
        }
      }
      s.range = s.highest - s.lowest;
      winners[{metric, cls}].emplace_back(protocol, s.winner);
      report.slices.push_back(std::move(s));
    }
    for (const auto& metric : wanted) {
      if (!seen.count(metric)) {
        throw Error(fmt::format("empty metric slice: '{}' not present in protocol '{}'", metric, protocol));
      }
    }
  }

  for (auto& [key, list] : winners) {
    if (list.size() < 2) continue;
    WinnerFlip f;
    f.metric = key.first;
    f.class_id = key.second;
    f.winners = list;
    f.flipped = std::any_of(list.begin(), list.end(), [&](const auto& w) { return w.second != list.front().second; });
    report.flips.push_back(std::move(f));
  }
  return report;
}

}  // namespace stabench::stability
