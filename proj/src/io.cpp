#include "stabench/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <png.h>

#include "stabench/error.hpp"

namespace stabench::io {

namespace {

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

bool is_png(std::string_view bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

int infer_classes(const std::vector<int>& labels, std::optional<int> num_classes) {
  if (num_classes) return *num_classes;
  const int max_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  if (max_label < 1) {
    throw Error("mask contains a single class; pass the class count explicitly");
  }
  return max_label + 1;
}

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<unsigned char> decode_png(std::string_view bytes, png_uint_32 format, int& height,
                                      int& width, bool require_gray8) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(fmt::format("unreadable PNG: {}", png.image.message));
  }
  if (require_gray8) {
    const auto f = png.image.format;
    if ((f & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR |
              PNG_FORMAT_FLAG_COLORMAP)) != 0) {
      throw Error("mask PNG must be 8-bit single-channel");
    }
  }
  png.image.format = format;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(fmt::format("PNG decode failed: {}", png.image.message));
  }
  height = static_cast<int>(png.image.height);
  width = static_cast<int>(png.image.width);
  return buffer;
}

void write_png_gray8(const fs::path& path, int height, int width, const std::vector<unsigned char>& pixels) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(fmt::format("PNG encode failed: {}", png.image.message));
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(fmt::format("PNG encode failed: {}", png.image.message));
  }
  out.resize(size);
  write_file_atomic(path, out);
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

double parse_double(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw Error(fmt::format("unparsable value '{}'", field));
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

LabelMask parse_label_mask_text(std::string_view text, std::optional<int> num_classes) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error("empty mask text");
  std::vector<int> labels;
  int width = -1;
  for (const auto line : lines) {
    int row_width = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t') {
        ++i;
        continue;
      }
      int v = 0;
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
      if (ec != std::errc{} || v < 0 || (ptr != line.data() + line.size() && *ptr != ' ' && *ptr != '\t')) {
        throw Error(fmt::format("invalid mask token in line '{}'", line));
      }
      labels.push_back(v);
      ++row_width;
      i = static_cast<std::size_t>(ptr - line.data());
    }
    if (width < 0) width = row_width;
    if (row_width != width || row_width == 0) throw Error("non-rectangular mask text");
  }
  const int height = static_cast<int>(lines.size());
  const int k = infer_classes(labels, num_classes);
  return LabelMask(height, width, k, std::move(labels));
}

std::string format_label_mask_text(const LabelMask& mask) {
  std::string out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (x) out += ' ';
      out += std::to_string(mask.at(y, x));
    }
    out += '\n';
  }
  return out;
}

LabelMask read_label_mask(const fs::path& path, std::optional<int> num_classes) {
  const std::string bytes = read_file(path);
  if (!is_png(bytes)) return parse_label_mask_text(bytes, num_classes);
  int h = 0;
  int w = 0;
  const auto pixels = decode_png(bytes, PNG_FORMAT_GRAY, h, w, true);
  std::vector<int> labels(pixels.begin(), pixels.end());
  const int k = infer_classes(labels, num_classes);
  return LabelMask(h, w, k, std::move(labels));
}

void write_label_mask_png(const fs::path& path, const LabelMask& mask) {
  std::vector<unsigned char> pixels;
  pixels.reserve(mask.size());
  for (int v : mask.labels()) {
    if (v > 255) throw Error("label does not fit in 8 bits");
    pixels.push_back(static_cast<unsigned char>(v));
  }
  write_png_gray8(path, mask.height(), mask.width(), pixels);
}

ProbMap parse_prob_map(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos || nl > 128) throw Error("bad PMAP header");
  const auto fields = split(bytes.substr(0, nl), ' ');
  if (fields.size() != 5 || fields[0] != "PMAP" || fields[1] != "v1") throw Error("bad PMAP magic/header");
  long dims[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const auto f = fields[2 + i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), dims[i]);
    if (ec != std::errc{} || ptr != f.data() + f.size() || dims[i] < 1 || dims[i] > (1L << 20)) {
      throw Error(fmt::format("bad PMAP dimension '{}'", f));
    }
  }
  const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const auto payload = bytes.substr(nl + 1);
  if (payload.size() != count * 4) {
    throw Error(fmt::format("payload length mismatch: {} bytes, expected {}", payload.size(), count * 4));
  }
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, payload.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    values[i] = std::bit_cast<float>(bits);
  }
  return ProbMap(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                 std::move(values));
}

ProbMap read_prob_map(const fs::path& path) { return parse_prob_map(read_file(path)); }

std::string encode_prob_map(const ProbMap& map) {
  std::string out = fmt::format("PMAP v1 {} {} {}\n", map.height(), map.width(), map.num_classes());
  const std::size_t header = out.size();
  out.resize(header + map.values().size() * 4);
  for (std::size_t i = 0; i < map.values().size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(map.values()[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    std::memcpy(out.data() + header + 4 * i, &bits, 4);
  }
  return out;
}

void write_prob_map(const fs::path& path, const ProbMap& map) { write_file_atomic(path, encode_prob_map(map)); }

ScoreTable parse_score_table(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines[0]) != "model,fold,metric,class,value") {
    throw Error("score table must start with header model,fold,metric,class,value");
  }
  std::vector<ScoreRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw Error(fmt::format("line {}: expected 5 fields, got {}", i + 1, f.size()));
    ScoreRecord r;
    r.model = std::string(trim(f[0]));
    const auto fold = trim(f[1]);
    const auto [ptr, ec] = std::from_chars(fold.data(), fold.data() + fold.size(), r.fold);
    if (fold.empty() || ec != std::errc{} || ptr != fold.data() + fold.size() || r.fold < 0) {
      throw Error(fmt::format("line {}: unparsable fold '{}'", i + 1, fold));
    }
    r.metric = std::string(trim(f[2]));
    r.class_id = std::string(trim(f[3]));
    if (r.model.empty() || r.metric.empty() || r.class_id.empty()) {
      throw Error(fmt::format("line {}: empty key field", i + 1));
    }
    try {
      r.value = parse_double(f[4]);
    } catch (const Error& e) {
      throw Error(fmt::format("line {}: {}", i + 1, e.what()));
    }
    records.push_back(std::move(r));
  }
  return ScoreTable(std::move(records));
}

ScoreTable read_score_table(const fs::path& path) {
  try {
    return parse_score_table(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_score_table(const ScoreTable& table) {
  std::string out = "model,fold,metric,class,value\n";
  for (const auto& r : table.records()) {
    out += fmt::format("{},{},{},{},{}\n", r.model, r.fold, r.metric, r.class_id, format_double(r.value));
  }
  return out;
}

void write_score_table(const fs::path& path, const ScoreTable& table) {
  write_file_atomic(path, format_score_table(table));
}

GrayImage read_gray_image(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (!is_png(bytes)) throw Error(fmt::format("'{}' is not a PNG", path.string()));
  GrayImage img;
  const auto pixels = decode_png(bytes, PNG_FORMAT_GRAY, img.height, img.width, false);
  img.values.reserve(pixels.size());
  for (auto p : pixels) img.values.push_back(p / 255.0);
  return img;
}

void write_gray_png(const fs::path& path, int height, int width, const std::vector<double>& values) {
  std::vector<unsigned char> pixels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    pixels[i] = static_cast<unsigned char>(std::lround(std::clamp(values[i], 0.0, 1.0) * 255.0));
  }
  write_png_gray8(path, height, width, pixels);
}

}  // namespace stabench::io
