#include <doctest.h>

#include "stabench/error.hpp"
#include "stabench/io.hpp"
#include "support.hpp"

using namespace stabench;

TEST_CASE("label mask validation") {
  CHECK_THROWS_AS(LabelMask(2, 2, 4, {0, 1, 2, 4}), Error);
  CHECK_THROWS_AS(LabelMask(2, 2, 1, {0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(LabelMask(2, 2, 4, {0, 1, 2}), Error);
  CHECK_THROWS_AS(LabelMask(2, 1, 4, {0, -1}), Error);
  CHECK_NOTHROW(LabelMask(2, 2, 4, {0, 1, 2, 3}));
}

TEST_CASE("probability map validation") {
  CHECK_THROWS_WITH_AS(ProbMap(1, 1, 2, {0.5f, 0.4f}), doctest::Contains("not normalized"), Error);
  CHECK_THROWS_AS(ProbMap(1, 1, 2, {1.5f, -0.5f}), Error);
  CHECK_NOTHROW(ProbMap(1, 1, 2, {0.25f, 0.75f}));
}

TEST_CASE("score table design checks") {
  std::vector<ScoreRecord> dup{{"a", 0, "dice", "macro", 0.5}, {"a", 0, "dice", "macro", 0.6}};
  CHECK_THROWS_WITH_AS(ScoreTable{dup}, doctest::Contains("duplicate record"), Error);
  std::vector<ScoreRecord> ragged{{"a", 0, "dice", "macro", 0.5}, {"a", 1, "dice", "macro", 0.6},
                                  {"b", 0, "dice", "macro", 0.7}};
  CHECK_THROWS_WITH_AS(ScoreTable{ragged}, doctest::Contains("non-rectangular design"), Error);

  std::vector<ScoreRecord> ok{{"b", 0, "dice", "macro", 0.5}, {"a", 0, "dice", "macro", 0.6},
                              {"b", 1, "dice", "macro", 0.7}, {"a", 1, "dice", "macro", 0.8}};
  const ScoreTable t(ok);
  const auto m = t.matrix("dice", "macro");
  REQUIRE(m.models == std::vector<std::string>{"a", "b"});
  CHECK(m.scores[1][0] == 0.8);
  CHECK(m.scores[0][1] == 0.5);
  CHECK(t.has_slice("dice", "macro"));
  CHECK_FALSE(t.has_slice("iou", "macro"));
}

TEST_CASE("score table csv round trip") {
  const std::string text =
      "model,fold,metric,class,value\n"
      "UNet,0,dice,macro,0.807\n"
      "UNet,1,dice,macro,0.1\n"
      "SAM,0,dice,macro,0.799\n"
      "SAM,1,dice,macro,1e-3\n";
  const auto t = io::parse_score_table(text);
  CHECK(t.records().size() == 4);
  const auto again = io::parse_score_table(io::format_score_table(t));
  CHECK(again.records() == t.records());
  CHECK_THROWS_AS(io::parse_score_table("model,fold,metric,class,value\nA,0,dice,macro,0.5x\n"), Error);
  CHECK_THROWS_AS(io::parse_score_table("m,f,metric,class,value\n"), Error);
  CHECK_THROWS_AS(io::parse_score_table("model,fold,metric,class,value\nA,zero,dice,macro,0.5\n"), Error);
}

TEST_CASE("double formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.807, -2.5}) CHECK(io::parse_double(io::format_double(v)) == v);
  CHECK_THROWS_AS(io::parse_double(""), Error);
  CHECK_THROWS_AS(io::parse_double("1.0 2"), Error);
  CHECK_THROWS_AS(io::parse_double("nan"), Error);
  CHECK(io::parse_double(" 0.5 ") == 0.5);
}

TEST_CASE("probability map encoding") {
  std::mt19937_64 gen(3);
  const auto p = test_support::random_probs(gen, 5, 7, 4);
  const auto bytes = io::encode_prob_map(p);
  CHECK(bytes.rfind("PMAP v1 5 7 4\n", 0) == 0);
  CHECK(io::parse_prob_map(bytes) == p);
  CHECK_THROWS_WITH_AS(io::parse_prob_map("PMAQ v1 1 1 2\n12345678"), doctest::Contains("bad PMAP"), Error);
  CHECK_THROWS_WITH_AS(io::parse_prob_map(bytes.substr(0, bytes.size() - 4)),
                       doctest::Contains("payload length mismatch"), Error);
}

TEST_CASE("label mask text and png") {
  const auto m = io::parse_label_mask_text("0 1 2\n3 2 1\n");
  CHECK(m.height() == 2);
  CHECK(m.width() == 3);
  CHECK(m.num_classes() == 4);
  CHECK(io::parse_label_mask_text(io::format_label_mask_text(m), 4) == m);
  CHECK_THROWS_WITH_AS(io::parse_label_mask_text("0 1\n1\n"), doctest::Contains("non-rectangular"), Error);
  CHECK_THROWS_WITH_AS(io::parse_label_mask_text("0 0\n0 0\n"), doctest::Contains("single class"), Error);
  CHECK(io::parse_label_mask_text("0 0\n0 0\n", 4).num_classes() == 4);

  const auto dir = test_support::temp_dir("io_png");
  io::write_label_mask_png(dir / "m.png", m);
  CHECK(io::read_label_mask(dir / "m.png", 4) == m);
  io::write_file_atomic(dir / "m.txt", io::format_label_mask_text(m));
  CHECK(io::read_label_mask(dir / "m.txt", 4) == m);
}

TEST_CASE("gray png round trip quantizes to 8 bits") {
  const auto dir = test_support::temp_dir("io_gray");
  std::vector<double> v{0.0, 0.5, 1.0, 2.0, -1.0, 0.25};
  io::write_gray_png(dir / "g.png", 2, 3, v);
  const auto g = io::read_gray_image(dir / "g.png");
  REQUIRE(g.values.size() == 6);
  CHECK(g.values[0] == 0.0);
  CHECK(g.values[1] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(g.values[2] == 1.0);
  CHECK(g.values[3] == 1.0);
  CHECK(g.values[4] == 0.0);
}

TEST_CASE("atomic write leaves no temporary files") {
  const auto dir = test_support::temp_dir("io_atomic");
  io::write_file_atomic(dir / "a.txt", "one");
  io::write_file_atomic(dir / "a.txt", "two");
  CHECK(io::read_file(dir / "a.txt") == "two");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++n;
  CHECK(n == 1);
}
