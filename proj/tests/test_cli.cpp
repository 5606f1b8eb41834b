#include <doctest.h>

#include <json.hpp>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "stabench/config.hpp"
#include "stabench/error.hpp"
#include "stabench/io.hpp"
#include "support.hpp"

using namespace stabench;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "stabench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return (test_support::data_dir() / "fixtures" / name).string(); }

void write_scores(const fs::path& path, const std::vector<ScoreRecord>& r) {
  io::write_score_table(path, ScoreTable(r));
}

}  // namespace

TEST_CASE("config precedence: flags over file over defaults") {
  const RunConfig defaults = resolve_config(std::nullopt, {});
  CHECK(defaults.seed == 0);
  CHECK(defaults.level == 0.95);
  CHECK(defaults.n_resamples == 10000);
  CHECK(defaults.alpha == 0.05);
  CHECK(defaults.foreground_classes == std::vector<int>{1, 2, 3});

  const auto dir = test_support::temp_dir("cli_config");
  io::write_file_atomic(dir / "c.json", R"({"seed": 11, "level": 0.9, "alpha": 0.1})");
  const RunConfig file = resolve_config(dir / "c.json", {});
  CHECK(file.seed == 11);
  CHECK(file.level == 0.9);
  CHECK(file.alpha == 0.1);
  CHECK(file.n_resamples == 10000);

  ConfigOverrides flags;
  flags.seed = 99;
  const RunConfig both = resolve_config(dir / "c.json", flags);
  CHECK(both.seed == 99);
  CHECK(both.level == 0.9);
  CHECK(both.n_resamples == 10000);

  io::write_file_atomic(dir / "bad.json", R"({"sede": 1})");
  CHECK_THROWS_AS(resolve_config(dir / "bad.json", {}), Error);
  io::write_file_atomic(dir / "bad2.json", R"({"xai_weights": [1, 2]})");
  CHECK_THROWS_AS(resolve_config(dir / "bad2.json", {}), Error);

  const auto out = dir / "r.json";
  const auto r = run({"analyze", "--scores", fixture("flip_loocv.csv"), "--config", (dir / "c.json").string(),
                      "--seed", "5", "--n-resamples", "300", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(io::read_file(out));
  CHECK(j["options"]["seed"] == 5);
  CHECK(j["options"]["level"] == 0.9);
  CHECK(j["options"]["alpha"] == 0.1);
  CHECK(j["options"]["n_resamples"] == 300);
}

TEST_CASE("splits command is deterministic") {
  const auto a = run({"splits", "--n", "9", "--k", "3", "--seed", "7"});
  const auto b = run({"splits", "--n", "9", "--k", "3", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out)["folds"].size() == 3);
  CHECK(run({"splits", "--n", "1"}).code == 1);
}

TEST_CASE("metrics command") {
  const auto dir = test_support::temp_dir("cli_metrics");
  fs::create_directories(dir / "pred");
  fs::create_directories(dir / "gt");
  const auto empty = run({"metrics", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out",
                          (dir / "s.csv").string()});
  CHECK(empty.code == 1);
  CHECK(empty.err.find("no mask pairs") != std::string::npos);

  const LabelMask m(2, 3, 4, {0, 1, 2, 3, 1, 2});
  io::write_label_mask_png(dir / "pred" / "img0.png", m);
  io::write_label_mask_png(dir / "gt" / "img0.png", m);
  const auto ok = run({"metrics", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out",
                       (dir / "s.csv").string(), "--model", "UNet"});
  REQUIRE(ok.code == 0);
  const auto t = io::read_score_table(dir / "s.csv");
  CHECK(t.records().size() == 8);
  for (const auto& r : t.records()) {
    CHECK(r.value == 1.0);
    CHECK(r.model == "UNet");
  }

  io::write_label_mask_png(dir / "pred" / "img1.png", m);
  const auto unmatched = run({"metrics", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out",
                              (dir / "s.csv").string()});
  CHECK(unmatched.code == 1);
  CHECK(unmatched.err.find("unmatched") != std::string::npos);
}

TEST_CASE("analyze command exit codes") {
  const auto dir = test_support::temp_dir("cli_analyze");
  const auto flip = run({"analyze", "--scores", fixture("flip_loocv.csv"), fixture("flip_kfold3.csv"), "--protocol",
                         "loocv", "kfold3", "--n-resamples", "500", "--plots", (dir / "plots").string()});
  CHECK(flip.code == 0);
  CHECK(flip.out.find("winner flip on dice/macro") != std::string::npos);
  CHECK(fs::exists(dir / "plots" / "cd_diagram.svg"));

  std::vector<ScoreRecord> tied;
  for (int f = 0; f < 3; ++f)
    for (const char* m : {"A", "B"}) tied.push_back({m, f, "dice", "macro", 0.5});
  write_scores(dir / "tied.csv", tied);
  const auto deg = run({"analyze", "--scores", (dir / "tied.csv").string(), "--n-resamples", "200"});
  CHECK(deg.code == 2);
  CHECK(deg.out.find("p = 1.000000") != std::string::npos);

  io::write_file_atomic(dir / "ragged.csv", "model,fold,metric,class,value\nA,0,dice,macro,0.5\nA,1,dice,macro,0.6\n"
                                            "B,0,dice,macro,0.7\n");
  const auto bad = run({"analyze", "--scores", (dir / "ragged.csv").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("non-rectangular") != std::string::npos);

  write_scores(dir / "single.csv", {{"A", 0, "dice", "macro", 0.5}, {"A", 1, "dice", "macro", 0.6}});
  const auto single = run({"analyze", "--scores", (dir / "single.csv").string(), "--n-resamples", "200"});
  CHECK(single.code == 0);
  CHECK(single.out.find("Friedman test skipped") != std::string::npos);

  CHECK(run({"analyze", "--scores", fixture("flip_loocv.csv"), "--protocol", "a", "b"}).code == 1);
  CHECK(run({"analyze"}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("analyze and report outputs are reproducible") {
  const auto dir = test_support::temp_dir("cli_repro");
  for (const char* sub : {"a", "b"}) {
    REQUIRE(run({"analyze", "--scores", fixture("flip_loocv.csv"), fixture("flip_kfold3.csv"), "--n-resamples", "400",
                 "--out", (dir / sub / "r.json").string(), "--plots", (dir / sub / "plots").string()})
                .code == 0);
  }
  CHECK(io::read_file(dir / "a" / "r.json") == io::read_file(dir / "b" / "r.json"));
  CHECK(io::read_file(dir / "a" / "plots" / "forest.svg") == io::read_file(dir / "b" / "plots" / "forest.svg"));

  REQUIRE(run({"report", "--report", (dir / "a" / "r.json").string(), "--out-dir", (dir / "re").string()}).code == 0);
  for (const char* f : {"cd_diagram.svg", "forest.svg", "rank_trajectories.svg", "effect_grid.svg"}) {
    CHECK(io::read_file(dir / "re" / f) == io::read_file(dir / "a" / "plots" / f));
  }
}

TEST_CASE("xai commands") {
  const auto dir = test_support::temp_dir("cli_xai");
  std::vector<int> labels;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) labels.push_back((x / 2 + y / 4) % 4);
  const LabelMask gt(8, 8, 4, labels);
  labels[9] = (labels[9] + 1) % 4;
  const LabelMask pred(8, 8, 4, labels);
  io::write_label_mask_png(dir / "gt.png", gt);
  io::write_label_mask_png(dir / "pred.png", pred);
  io::write_prob_map(dir / "p.pmap", test_support::one_hot_probs(pred));
  std::vector<double> img;
  for (int i = 0; i < 64; ++i) img.push_back((i % 8) / 7.0);
  io::write_gray_png(dir / "img.png", 8, 8, img);

  const auto r = run({"xai", "--image", (dir / "img.png").string(), "--probmap", (dir / "p.pmap").string(), "--pred",
                      (dir / "pred.png").string(), "--gt", (dir / "gt.png").string(), "--out-dir",
                      (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto u = io::read_gray_image(dir / "out" / "uncertainty.png");
  for (double v : u.values) CHECK(v == 0.0);
  const auto e = io::read_gray_image(dir / "out" / "error.png");
  CHECK(e.values[9] == 1.0);
  const auto summary = nlohmann::json::parse(io::read_file(dir / "out" / "summary.json"));
  CHECK(summary["layers"].size() == 6);
  CHECK(summary["attention_masks"] == "pred");

  std::mt19937_64 gen(3);
  fs::create_directories(dir / "folds");
  for (int f = 0; f < 3; ++f) {
    io::write_prob_map(dir / "folds" / ("f" + std::to_string(f) + ".pmap"), test_support::random_probs(gen, 8, 8, 4));
  }
  const auto st = run({"xai-stability", "--maps", (dir / "folds").string(), "--out-dir", (dir / "stab").string()});
  REQUIRE(st.code == 0);
  CHECK(fs::exists(dir / "stab" / "mean.png"));
  CHECK(fs::exists(dir / "stab" / "variance.png"));
  CHECK(nlohmann::json::parse(io::read_file(dir / "stab" / "stability.json"))["n_folds"] == 3);
}

TEST_CASE("sweep command") {
  const auto dir = test_support::temp_dir("cli_sweep");
  const auto r = run({"sweep", "--objective", "builtin:quadratic1d", "--budget", "30", "--seed", "1", "--out",
                      (dir / "t.csv").string()});
  REQUIRE(r.code == 0);
  const auto csv = io::read_file(dir / "t.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,point,score,best_so_far");
  double best = -1e300, best_x = -1;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto q1 = line.find('"');
    const auto q2 = line.rfind('"');
    std::string point = line.substr(q1 + 1, q2 - q1 - 1);
    for (std::size_t p = point.find("\"\""); p != std::string::npos; p = point.find("\"\"", p + 1)) point.erase(p, 1);
    const auto rest = line.substr(q2 + 2);
    const double score = std::stod(rest.substr(0, rest.find(',')));
    if (score > best) best = score, best_x = nlohmann::json::parse(point)["x"].get<double>();
  }
  CHECK(rows == 30);
  CHECK(std::abs(best_x - 0.3) <= 0.05);

  const auto again = run({"sweep", "--objective", "builtin:quadratic1d", "--budget", "30", "--seed", "1", "--out",
                          (dir / "t2.csv").string()});
  CHECK(io::read_file(dir / "t2.csv") == csv);

  CHECK(run({"sweep", "--objective", "quadratic1d", "--out", (dir / "x.csv").string()}).code == 1);
  const auto space = (test_support::data_dir() / "spaces" / "table1.json").string();
  const auto sim = run({"sweep", "--objective", "builtin:simulated-fold-score", "--space", space, "--budget", "12",
                        "--out", (dir / "s.csv").string()});
  CHECK(sim.code == 0);
}
