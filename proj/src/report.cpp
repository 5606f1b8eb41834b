#include "stabench/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "stabench/error.hpp"
#include "stabench/io.hpp"

namespace stabench::report {

namespace {

using svg::Element;
using svg::Figure;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

Figure note_panel(const std::string& title, const std::string& note) {
  Figure f(640, 60, title);
  f.add(svg::text(10, 20, title, "start", 14).cls("title"));
  f.add(svg::text(10, 44, note, "start", 12).cls("note"));
  return f;
}

}  // namespace

std::string magnitude_color(stability::Magnitude m) {
  switch (m) {
    case stability::Magnitude::negligible: return "#f0f0f0";
    case stability::Magnitude::small: return "#c6dbef";
    case stability::Magnitude::medium: return "#6baed6";
    case stability::Magnitude::large: return "#2171b5";
  }
  return "#f0f0f0";
}

std::string model_color(std::size_t index) { return kPalette[index % kPalette.size()]; }

Figure render_cd_diagram(const stability::FriedmanResult& friedman, const stability::NemenyiResult& nemenyi,
                         const std::string& title) {
  const std::size_t k = friedman.models.size();
  if (k == 0) throw Error("CD diagram needs at least one model");
  std::vector<std::pair<std::string, double>> order;
  for (std::size_t i = 0; i < k; ++i) order.emplace_back(friedman.models[i], friedman.mean_ranks[i]);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });

  constexpr double left = 170.0;
  constexpr double right = 630.0;
  constexpr double axis_y = 70.0;
  const double max_rank = static_cast<double>(std::max<std::size_t>(k, 2));
  auto x_of = [&](double r) { return left + (std::clamp(r, 1.0, max_rank) - 1.0) / (max_rank - 1.0) * (right - left); };

  std::vector<const stability::Clique*> bars;
  for (const auto& c : nemenyi.cliques) {
    if (c.size() >= 2) bars.push_back(&c);
  }
  const double label_top = axis_y + 14.0 + static_cast<double>(bars.size()) * 8.0 + 14.0;
  const std::size_t half = (k + 1) / 2;
  const double height = label_top + static_cast<double>(half) * 18.0 + 10.0;
  Figure fig(800, height, title);

  fig.add(svg::text(10, 20, fmt::format("{} (Friedman p = {:.3f})", title, friedman.p_value), "start", 14).cls("title"));

  const double cd_end = std::min(right, x_of(1.0 + nemenyi.critical_difference));
  fig.add(svg::line(left, 45, cd_end, 45, "black", 2).cls("cd-ruler"));
  fig.add(svg::line(left, 41, left, 49, "black", 1).cls("cd-ruler-tick"));
  fig.add(svg::line(cd_end, 41, cd_end, 49, "black", 1).cls("cd-ruler-tick"));
  fig.add(svg::text((left + cd_end) / 2.0, 38, fmt::format("CD = {:.3f}", nemenyi.critical_difference), "middle", 11)
              .cls("cd-label"));

  fig.add(svg::line(left, axis_y, right, axis_y, "black", 1).cls("axis"));
  for (std::size_t r = 1; r <= static_cast<std::size_t>(max_rank); ++r) {
    const double x = x_of(static_cast<double>(r));
    fig.add(svg::line(x, axis_y, x, axis_y + 6, "black", 1).cls("tick"));
    fig.add(svg::text(x, axis_y - 4, std::to_string(r), "middle", 10).cls("tick-label"));
  }

  for (std::size_t b = 0; b < bars.size(); ++b) {
    double lo = max_rank;
    double hi = 1.0;
    for (const auto& m : *bars[b]) {
      const auto it = std::find_if(order.begin(), order.end(), [&](const auto& p) { return p.first == m; });
      if (it == order.end()) throw Error(fmt::format("clique member '{}' has no mean rank", m));
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    }
    const double y = axis_y + 14.0 + static_cast<double>(b) * 8.0;
    fig.add(svg::line(std::max(0.0, x_of(lo) - 4.0), y, x_of(hi) + 4.0, y, "black", 3).cls("clique-bar"));
  }

  for (std::size_t i = 0; i < k; ++i) {
    const auto& [model, rank] = order[i];
    const bool on_left = i < half;
    const double row_y = label_top + static_cast<double>(on_left ? i : i - half) * 18.0;
    const double x = x_of(rank);
    const double end_x = on_left ? left - 10.0 : right + 10.0;
    fig.add(svg::polyline({{x, axis_y}, {x, row_y}, {end_x, row_y}}, "#555555", 1).cls("connector"));
    const std::string label = fmt::format("{} ({:.2f})", model, rank);
    fig.add(svg::text(on_left ? end_x - 4.0 : end_x + 4.0, row_y + 4.0, label, on_left ? "end" : "start", 12)
                .cls("model-label"));
  }
  return fig;
}

Figure render_forest_plot(const std::vector<std::pair<std::string, stability::BootstrapCI>>& cis,
                          const std::string& title) {
  if (cis.empty()) throw Error("forest plot needs at least one interval");
  auto rows = cis;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second.mean != b.second.mean ? a.second.mean > b.second.mean : a.first < b.first;
  });

  double lo = rows.front().second.lower;
  double hi = rows.front().second.upper;
  for (const auto& [m, ci] : rows) {
    lo = std::min(lo, ci.lower);
    hi = std::max(hi, ci.upper);
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : 0.05;
  lo -= pad;
  hi += pad;

  constexpr double left = 190.0;
  constexpr double right = 640.0;
  constexpr double top = 50.0;
  constexpr double row_h = 26.0;
  const double axis_y = top + static_cast<double>(rows.size()) * row_h + 5.0;
  Figure fig(700, axis_y + 44.0, title);
  auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * (right - left); };

  fig.add(svg::text(10, 20, title, "start", 14).cls("title"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [model, ci] = rows[i];
    const double y = top + (static_cast<double>(i) + 0.5) * row_h;
    const double xm = x_of(ci.mean);
    std::vector<Element> parts;
    parts.push_back(svg::text(left - 12.0, y + 4.0, model, "end", 12).cls("row-label"));
    parts.push_back(svg::line(x_of(ci.lower), y, x_of(ci.upper), y, "black", 1.5).cls("whisker"));
    parts.push_back(svg::line(x_of(ci.lower), y - 5, x_of(ci.lower), y + 5, "black", 1).cls("whisker-cap"));
    parts.push_back(svg::line(x_of(ci.upper), y - 5, x_of(ci.upper), y + 5, "black", 1).cls("whisker-cap"));
    parts.push_back(svg::polygon({{xm, y - 6}, {xm + 6, y}, {xm, y + 6}, {xm - 6, y}}, "#d62728").cls("marker"));
    auto g = svg::group(std::move(parts));
    g.cls("forest-row").attr("data-model", model);
    fig.add(std::move(g));
  }

  fig.add(svg::line(left, axis_y, right, axis_y, "black", 1).cls("axis"));
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double x = x_of(v);
    fig.add(svg::line(x, axis_y, x, axis_y + 5, "black", 1).cls("tick"));
    fig.add(svg::text(x, axis_y + 17, fmt::format("{:.3f}", v), "middle", 10).cls("tick-label"));
  }
  const double level = rows.front().second.level;
  fig.add(svg::text((left + right) / 2.0, axis_y + 36, fmt::format("Score: mean and {:g}% CI", 100.0 * level), "middle", 12)
              .cls("axis-label"));
  return fig;
}

Figure render_rank_trajectories(const std::map<std::string, std::vector<double>>& trajectories,
                                const std::string& title) {
  if (trajectories.empty()) throw Error("rank trajectories need at least one model");
  const std::size_t folds = trajectories.begin()->second.size();
  if (folds == 0) throw Error("rank trajectories are empty");
  double max_rank = static_cast<double>(trajectories.size());
  for (const auto& [m, t] : trajectories) {
    if (t.size() != folds) throw Error("rank trajectories differ in length");
    for (double r : t) {
      if (!(r >= 1.0)) throw Error("ranks must be >= 1");
      max_rank = std::max(max_rank, r);
    }
  }
  max_rank = std::max(max_rank, 2.0);

  constexpr double left = 60.0;
  constexpr double top = 50.0;
  constexpr double step = 60.0;
  const double right = left + static_cast<double>(std::max<std::size_t>(folds - 1, 1)) * step;
  const double bottom = top + (max_rank - 1.0) * 40.0;
  Figure fig(right + 180.0, bottom + 50.0, title);
  auto x_of = [&](std::size_t f) { return folds == 1 ? (left + right) / 2.0 : left + static_cast<double>(f) * step; };
  auto y_of = [&](double r) { return top + (r - 1.0) / (max_rank - 1.0) * (bottom - top); };

  fig.add(svg::text(10, 20, title, "start", 14).cls("title"));
  fig.add(svg::line(left - 10, bottom + 10, right + 10, bottom + 10, "black", 1).cls("axis"));
  for (std::size_t f = 0; f < folds; ++f) {
    fig.add(svg::line(x_of(f), bottom + 10, x_of(f), bottom + 15, "black", 1).cls("x-tick"));
    fig.add(svg::text(x_of(f), bottom + 28, fmt::format("F{}", f + 1), "middle", 10).cls("x-tick-label"));
  }
  for (int r = 1; r <= static_cast<int>(std::ceil(max_rank)); ++r) {
    fig.add(svg::text(left - 20, y_of(r) + 4, std::to_string(r), "end", 10).cls("y-tick-label"));
  }

  std::size_t index = 0;
  for (const auto& [model, ranks] : trajectories) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t f = 0; f < folds; ++f) pts.emplace_back(x_of(f), y_of(ranks[f]));
    fig.add(svg::polyline(pts, model_color(index), 2).cls("trajectory").attr("data-model", model));
    const double ly = top + static_cast<double>(index) * 18.0;
    fig.add(svg::line(right + 30, ly, right + 50, ly, model_color(index), 2).cls("legend-swatch"));
    fig.add(svg::text(right + 56, ly + 4, model, "start", 11).cls("legend"));
    ++index;
  }
  return fig;
}

Figure render_effect_grid(const std::vector<std::string>& models, const std::vector<EffectCell>& cells,
                          const std::string& title) {
  const std::size_t n = models.size();
  const std::size_t grid = n > 1 ? n - 1 : 0;
  constexpr double left = 150.0;
  constexpr double top = 60.0;
  constexpr double cell = 60.0;
  const double legend_y = top + static_cast<double>(grid) * cell + 24.0;
  Figure fig(std::max(left + static_cast<double>(grid) * cell + 20.0, 460.0), legend_y + 30.0, title);
  fig.add(svg::text(10, 20, title, "start", 14).cls("title"));

  auto find = [&](const std::string& a, const std::string& b) -> const EffectCell* {
    for (const auto& c : cells) {
      if ((c.model_a == a && c.model_b == b) || (c.model_a == b && c.model_b == a)) return &c;
    }
    return nullptr;
  };

  for (std::size_t j = 1; j < n; ++j) {
    fig.add(svg::text(left + (static_cast<double>(j) - 0.5) * cell, top - 8, models[j], "middle", 10).cls("col-label"));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    fig.add(svg::text(left - 8, top + (static_cast<double>(i) + 0.5) * cell + 4, models[i], "end", 10).cls("row-label"));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = left + static_cast<double>(j - 1) * cell;
      const double y = top + static_cast<double>(i) * cell;
      const auto* c = find(models[i], models[j]);
      std::string fill = "#dddddd";
      std::string label = "n/a";
      if (c && c->effect) {
        const double d = c->model_a == models[i] ? c->effect->cohens_d : -c->effect->cohens_d;
        fill = magnitude_color(c->effect->magnitude);
        label = fmt::format("{:.2f}", d);
        if (label == "-0.00") label = "0.00";
      } else if (c) {
        label = "inf";
      }
      fig.add(svg::rect(x, y, cell, cell, fill, "white").cls("effect-cell"));
      fig.add(svg::text(x + cell / 2.0, y + cell / 2.0 + 4.0, label, "middle", 12).cls("effect-value"));
    }
  }

  const std::array<stability::Magnitude, 4> mags = {stability::Magnitude::negligible, stability::Magnitude::small,
                                                   stability::Magnitude::medium, stability::Magnitude::large};
  for (std::size_t i = 0; i < mags.size(); ++i) {
    const double x = 10.0 + static_cast<double>(i) * 110.0;
    fig.add(svg::rect(x, legend_y - 10, 12, 12, magnitude_color(mags[i]), "#999999").cls("legend-swatch"));
    fig.add(svg::text(x + 16, legend_y, std::string(stability::to_string(mags[i])), "start", 11).cls("legend"));
  }
  return fig;
}

RenderedReport render_all(const analysis::StabilityReport& report) {
  std::vector<Figure> cd;
  std::vector<Figure> forest;
  std::vector<Figure> traj;
  std::vector<Figure> effects;
  for (const auto& rk : report.rankings) {
    const auto& p = rk.protocol;
    if (rk.friedman && rk.nemenyi) {
      cd.push_back(render_cd_diagram(*rk.friedman, *rk.nemenyi, fmt::format("{}: critical difference", p)));
    } else {
      cd.push_back(note_panel(fmt::format("{}: critical difference", p), rk.note));
    }

    std::vector<std::pair<std::string, stability::BootstrapCI>> cis;
    std::vector<std::string> models;
    for (const auto& c : report.cis) {
      if (c.protocol != p) continue;
      cis.emplace_back(c.model, c.ci);
      models.push_back(c.model);
    }
    std::sort(models.begin(), models.end());
    if (!cis.empty()) forest.push_back(render_forest_plot(cis, fmt::format("{}: bootstrap confidence intervals", p)));

    std::map<std::string, std::vector<double>> trajectories;
    for (const auto& m : report.rank_stats) {
      if (m.protocol == p) trajectories[m.model] = m.stats.trajectory;
    }
    if (!trajectories.empty()) traj.push_back(render_rank_trajectories(trajectories, fmt::format("{}: rank trajectories", p)));

    std::vector<EffectCell> cells;
    for (const auto& e : report.effects) {
      if (e.protocol == p) cells.push_back({e.model_a, e.model_b, e.effect});
    }
    effects.push_back(render_effect_grid(models, cells, fmt::format("{}: pairwise Cohen's d", p)));
  }
  return {svg::stack_vertically(cd, "Critical difference diagrams"),
          svg::stack_vertically(forest, "Bootstrap confidence intervals"),
          svg::stack_vertically(traj, "Rank trajectories"), svg::stack_vertically(effects, "Pairwise effect sizes")};
}

void write_figures(const analysis::StabilityReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto figs = render_all(report);
  io::write_file_atomic(out_dir / kCdDiagramFile, figs.cd_diagram.to_string());
  io::write_file_atomic(out_dir / kForestFile, figs.forest.to_string());
  io::write_file_atomic(out_dir / kTrajectoryFile, figs.trajectories.to_string());
  io::write_file_atomic(out_dir / kEffectGridFile, figs.effect_grid.to_string());
}

}  // namespace stabench::report
