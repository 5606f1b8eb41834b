#include "stabench/analysis.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "stabench/error.hpp"
#include "stabench/rng.hpp"

namespace stabench::analysis {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<double> mean_fold_spearman(const std::vector<std::vector<double>>& ranks) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    for (std::size_t j = i + 1; j < ranks.size(); ++j) {
      try {
        // Ranks are "1 = best"; negate so that rank_descending keeps the order.
        std::vector<double> a(ranks[i].size());
        std::vector<double> b(ranks[j].size());
        std::transform(ranks[i].begin(), ranks[i].end(), a.begin(), [](double r) { return -r; });
        std::transform(ranks[j].begin(), ranks[j].end(), b.begin(), [](double r) { return -r; });
        sum += stability::spearman(a, b);
        ++count;
      } catch (const Error&) {
        // fully tied fold: correlation undefined
      }
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

const char* variant_name(stability::EffectVariant v) {
  return v == stability::EffectVariant::paired ? "paired" : "independent";
}

}  // namespace

bool StabilityReport::degenerate() const {
  return std::any_of(rankings.begin(), rankings.end(),
                     [](const ProtocolRanking& r) { return r.friedman && r.friedman->degenerate; });
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& protocol, const std::string& model) {
  return stream_seed(seed, fnv1a(protocol + '\x1f' + model));
}

StabilityReport analyze(const stability::ProtocolTables& tables, const AnalysisOptions& options) {
  if (tables.empty()) throw Error("no score tables to analyze");
  StabilityReport report;
  report.options = options;

  for (const auto& [protocol, table] : tables) {
    const auto matrix = table.matrix(options.metric, options.class_id);

    for (std::size_t j = 0; j < matrix.models.size(); ++j) {
      const auto scores = matrix.column(j);
      report.cis.push_back({protocol, matrix.models[j],
                            stability::bootstrap_ci(scores, options.level, options.n_resamples,
                                                    cell_seed(options.seed, protocol, matrix.models[j]))});
    }

    ProtocolRanking ranking;
    ranking.protocol = protocol;
    if (matrix.models.size() < 2) {
      ranking.note = "Friedman test skipped: fewer than 2 models";
    } else if (matrix.folds.size() < 2) {
      ranking.note = "Friedman test skipped: fewer than 2 folds";
    } else {
      ranking.friedman = stability::friedman_test(matrix, options.exact_friedman);
      if (ranking.friedman->degenerate) {
        report.warnings.push_back(fmt::format("{}: all models tied on every fold; Friedman p set to 1", protocol));
      }
      if (matrix.models.size() <= 10) {
        ranking.nemenyi = stability::nemenyi(*ranking.friedman, options.alpha);
      } else {
        ranking.note = "Nemenyi test skipped: more than 10 models";
      }
    }

    const auto ranks = stability::fold_ranks(matrix);
    ranking.mean_fold_spearman = matrix.models.size() >= 2 ? mean_fold_spearman(ranks) : std::nullopt;
    report.rankings.push_back(std::move(ranking));

    for (std::size_t j = 0; j < matrix.models.size(); ++j) {
      std::vector<double> trajectory;
      for (const auto& fold : ranks) trajectory.push_back(fold[j]);
      report.rank_stats.push_back({protocol, matrix.models[j], stability::rank_stats(trajectory)});
    }

    if (matrix.folds.size() >= 2) {
      for (std::size_t a = 0; a < matrix.models.size(); ++a) {
        for (std::size_t b = a + 1; b < matrix.models.size(); ++b) {
          PairEffect e{protocol, matrix.models[a], matrix.models[b], std::nullopt, {}};
          try {
            e.effect = stability::cohens_d(matrix.column(a), matrix.column(b), options.effect_variant);
          } catch (const Error& err) {
            e.note = err.what();
          }
          report.effects.push_back(std::move(e));
        }
      }
    }
  }

  report.instability = stability::instability_table(tables);
  return report;
}

Json to_json(const StabilityReport& r) {
  Json j;
  const auto& o = r.options;
  j["options"] = {{"metric", o.metric},
                  {"class", o.class_id},
                  {"level", o.level},
                  {"n_resamples", o.n_resamples},
                  {"seed", o.seed},
                  {"alpha", o.alpha},
                  {"exact_friedman", o.exact_friedman},
                  {"effect_variant", variant_name(o.effect_variant)}};

  auto& cis = j["cis"] = Json::array();
  for (const auto& c : r.cis) {
    cis.push_back({{"protocol", c.protocol},
                   {"metric", o.metric},
                   {"class", o.class_id},
                   {"model", c.model},
                   {"mean", c.ci.mean},
                   {"lower", c.ci.lower},
                   {"upper", c.ci.upper},
                   {"level", c.ci.level},
                   {"n_resamples", c.ci.n_resamples},
                   {"seed", c.ci.seed}});
  }

  auto& friedman = j["friedman"] = Json::object();
  auto& nemenyi = j["nemenyi"] = Json::object();
  for (const auto& rk : r.rankings) {
    if (rk.friedman) {
      const auto& f = *rk.friedman;
      Json fj;
      fj["models"] = f.models;
      Json ranks = Json::object();
      for (std::size_t i = 0; i < f.models.size(); ++i) ranks[f.models[i]] = f.mean_ranks[i];
      fj["mean_ranks"] = std::move(ranks);
      fj["n_folds"] = f.n_folds;
      fj["statistic"] = f.statistic;
      fj["dof"] = f.dof;
      fj["p_value"] = f.p_value;
      fj["tie_corrected"] = f.tie_corrected;
      fj["degenerate"] = f.degenerate;
      if (f.exact_p_value) fj["exact_p_value"] = *f.exact_p_value;
      if (rk.mean_fold_spearman) fj["mean_fold_spearman"] = *rk.mean_fold_spearman;
      friedman[rk.protocol] = std::move(fj);
    } else {
      friedman[rk.protocol] = {{"skipped", rk.note}};
    }
    if (rk.nemenyi) {
      const auto& n = *rk.nemenyi;
      Json nj;
      nj["critical_difference"] = n.critical_difference;
      nj["alpha"] = n.alpha;
      nj["q_alpha"] = n.q_alpha;
      auto& pairs = nj["pairwise"] = Json::array();
      for (const auto& [key, sig] : n.pairwise_significant) {
        pairs.push_back({{"a", key.first}, {"b", key.second}, {"significant", sig}});
      }
      nj["cliques"] = n.cliques;
      nemenyi[rk.protocol] = std::move(nj);
    } else if (rk.friedman) {
      nemenyi[rk.protocol] = {{"skipped", rk.note}};
    }
  }

  auto& effects = j["effect_sizes"] = Json::array();
  for (const auto& e : r.effects) {
    Json ej = {{"protocol", e.protocol}, {"model_a", e.model_a}, {"model_b", e.model_b}};
    if (e.effect) {
      ej["cohens_d"] = e.effect->cohens_d;
      ej["magnitude"] = std::string(stability::to_string(e.effect->magnitude));
    } else {
      ej["cohens_d"] = nullptr;
      ej["note"] = e.note;
    }
    effects.push_back(std::move(ej));
  }

  auto& ranks = j["rank_stats"] = Json::array();
  for (const auto& m : r.rank_stats) {
    ranks.push_back({{"protocol", m.protocol},
                     {"model", m.model},
                     {"mean_rank", m.stats.mean_rank},
                     {"range", m.stats.range},
                     {"std", m.stats.std},
                     {"top1_pct", m.stats.top1_pct},
                     {"top2_pct", m.stats.top2_pct},
                     {"trajectory", m.stats.trajectory}});
  }

  auto& inst = j["instability"] = Json::array();
  for (const auto& s : r.instability.slices) {
    inst.push_back({{"protocol", s.protocol},
                    {"metric", s.metric},
                    {"class", s.class_id},
                    {"winner", s.winner},
                    {"winner_mean", s.winner_mean},
                    {"tied_winners", s.tied_winners},
                    {"highest", s.highest},
                    {"highest_model", s.highest_model},
                    {"lowest", s.lowest},
                    {"lowest_model", s.lowest_model},
                    {"range", s.range}});
  }
  auto& flips = j["flips"] = Json::array();
  for (const auto& f : r.instability.flips) {
    Json winners = Json::object();
    for (const auto& [protocol, model] : f.winners) winners[protocol] = model;
    flips.push_back({{"metric", f.metric}, {"class", f.class_id}, {"winners", winners}, {"flipped", f.flipped}});
  }
  j["warnings"] = r.warnings;
  return j;
}

StabilityReport report_from_json(const Json& j) {
  try {
    StabilityReport r;
    const auto& o = j.at("options");
    r.options.metric = o.at("metric").get<std::string>();
    r.options.class_id = o.at("class").get<std::string>();
    r.options.level = o.at("level").get<double>();
    r.options.n_resamples = o.at("n_resamples").get<std::size_t>();
    r.options.seed = o.at("seed").get<std::uint64_t>();
    r.options.alpha = o.at("alpha").get<double>();
    r.options.exact_friedman = o.value("exact_friedman", false);
    r.options.effect_variant = o.value("effect_variant", std::string("independent")) == "paired"
                                   ? stability::EffectVariant::paired
                                   : stability::EffectVariant::independent;

    for (const auto& c : j.at("cis")) {
      stability::BootstrapCI ci;
      ci.mean = c.at("mean").get<double>();
      ci.lower = c.at("lower").get<double>();
      ci.upper = c.at("upper").get<double>();
      ci.level = c.at("level").get<double>();
      ci.n_resamples = c.at("n_resamples").get<std::size_t>();
      ci.seed = c.at("seed").get<std::uint64_t>();
      r.cis.push_back({c.at("protocol").get<std::string>(), c.at("model").get<std::string>(), ci});
    }

    for (const auto& [protocol, fj] : j.at("friedman").items()) {
      ProtocolRanking rk;
      rk.protocol = protocol;
      if (fj.contains("skipped")) {
        rk.note = fj.at("skipped").get<std::string>();
      } else {
        stability::FriedmanResult f;
        f.models = fj.at("models").get<std::vector<std::string>>();
        for (const auto& m : f.models) f.mean_ranks.push_back(fj.at("mean_ranks").at(m).get<double>());
        f.n_folds = fj.at("n_folds").get<std::size_t>();
        f.statistic = fj.at("statistic").get<double>();
        f.dof = fj.at("dof").get<int>();
        f.p_value = fj.at("p_value").get<double>();
        f.tie_corrected = fj.at("tie_corrected").get<bool>();
        f.degenerate = fj.at("degenerate").get<bool>();
        if (fj.contains("exact_p_value")) f.exact_p_value = fj.at("exact_p_value").get<double>();
        if (fj.contains("mean_fold_spearman")) rk.mean_fold_spearman = fj.at("mean_fold_spearman").get<double>();
        rk.friedman = std::move(f);
      }
      if (j.contains("nemenyi") && j.at("nemenyi").contains(protocol)) {
        const auto& nj = j.at("nemenyi").at(protocol);
        if (nj.contains("skipped")) {
          rk.note = nj.at("skipped").get<std::string>();
        } else {
          stability::NemenyiResult n;
          n.critical_difference = nj.at("critical_difference").get<double>();
          n.alpha = nj.at("alpha").get<double>();
          n.q_alpha = nj.at("q_alpha").get<double>();
          for (const auto& p : nj.at("pairwise")) {
            n.pairwise_significant[{p.at("a").get<std::string>(), p.at("b").get<std::string>()}] =
                p.at("significant").get<bool>();
          }
          n.cliques = nj.at("cliques").get<std::vector<stability::Clique>>();
          rk.nemenyi = std::move(n);
        }
      }
      r.rankings.push_back(std::move(rk));
    }

    for (const auto& e : j.at("effect_sizes")) {
      PairEffect pe{e.at("protocol").get<std::string>(), e.at("model_a").get<std::string>(),
                    e.at("model_b").get<std::string>(), std::nullopt, e.value("note", std::string())};
      if (!e.at("cohens_d").is_null()) {
        pe.effect = stability::EffectSize{e.at("cohens_d").get<double>(),
                                          stability::magnitude_from_string(e.at("magnitude").get<std::string>())};
      }
      r.effects.push_back(std::move(pe));
    }

    for (const auto& m : j.at("rank_stats")) {
      stability::RankStats s;
      s.mean_rank = m.at("mean_rank").get<double>();
      s.range = m.at("range").get<double>();
      s.std = m.at("std").get<double>();
      s.top1_pct = m.at("top1_pct").get<double>();
      s.top2_pct = m.at("top2_pct").get<double>();
      s.trajectory = m.at("trajectory").get<std::vector<double>>();
      r.rank_stats.push_back({m.at("protocol").get<std::string>(), m.at("model").get<std::string>(), std::move(s)});
    }

    for (const auto& s : j.at("instability")) {
      stability::SliceInstability si;
      si.protocol = s.at("protocol").get<std::string>();
      si.metric = s.at("metric").get<std::string>();
      si.class_id = s.at("class").get<std::string>();
      si.winner = s.at("winner").get<std::string>();
      si.winner_mean = s.at("winner_mean").get<double>();
      si.tied_winners = s.at("tied_winners").get<std::vector<std::string>>();
      si.highest = s.at("highest").get<double>();
      si.highest_model = s.at("highest_model").get<std::string>();
      si.lowest = s.at("lowest").get<double>();
      si.lowest_model = s.at("lowest_model").get<std::string>();
      si.range = s.at("range").get<double>();
      r.instability.slices.push_back(std::move(si));
    }
    for (const auto& f : j.at("flips")) {
      stability::WinnerFlip wf;
      wf.metric = f.at("metric").get<std::string>();
      wf.class_id = f.at("class").get<std::string>();
      for (const auto& [protocol, model] : f.at("winners").items()) {
        wf.winners.emplace_back(protocol, model.get<std::string>());
      }
      wf.flipped = f.at("flipped").get<bool>();
      r.instability.flips.push_back(std::move(wf));
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed stability report JSON: {}", e.what()));
  }
}

}  // namespace stabench::analysis
