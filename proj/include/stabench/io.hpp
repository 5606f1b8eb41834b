#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stabench/data_model.hpp"

namespace stabench::io {

namespace fs = std::filesystem;

// Reads an 8-bit single-channel PNG or a whitespace-separated text matrix
// (format detected from the PNG signature). Without `num_classes` the class
// count is inferred as max label + 1.
LabelMask read_label_mask(const fs::path& path, std::optional<int> num_classes = std::nullopt);
LabelMask parse_label_mask_text(std::string_view text, std::optional<int> num_classes = std::nullopt);
std::string format_label_mask_text(const LabelMask& mask);
void write_label_mask_png(const fs::path& path, const LabelMask& mask);

// "PMAP v1 <H> <W> <K>\n" followed by H*W*K little-endian float32 values.
ProbMap read_prob_map(const fs::path& path);
ProbMap parse_prob_map(std::string_view bytes);
std::string encode_prob_map(const ProbMap& map);
void write_prob_map(const fs::path& path, const ProbMap& map);

// CSV with header model,fold,metric,class,value.
ScoreTable read_score_table(const fs::path& path);
ScoreTable parse_score_table(std::string_view text);
std::string format_score_table(const ScoreTable& table);
void write_score_table(const fs::path& path, const ScoreTable& table);

// Any PNG, converted to 8-bit luma and scaled to [0, 1].
GrayImage read_gray_image(const fs::path& path);
// Values are clamped to [0, 1] and quantized to 8 bits.
void write_gray_png(const fs::path& path, int height, int width, const std::vector<double>& values);

std::string read_file(const fs::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view contents);

// Strict decimal/scientific parse of the whole field.
double parse_double(std::string_view field);
// Shortest representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace stabench::io
