#include "stabench/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stabench/error.hpp"

namespace stabench::svg {

namespace {

void check_points(const Element& e, double width, double height) {
  for (const auto& [x, y] : e.points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw Error(fmt::format("non-finite coordinate in <{}>", e.tag));
    if (x < -1e-9 || x > width + 1e-9 || y < -1e-9 || y > height + 1e-9) {
      throw Error(fmt::format("coordinate ({}, {}) of <{}> outside the {}x{} viewbox", x, y, e.tag, width, height));
    }
  }
  for (const auto& c : e.children) check_points(c, width, height);
}

void write(std::string& out, const Element& e, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += '<';
  out += e.tag;
  for (const auto& [k, v] : e.attrs) out += fmt::format(" {}=\"{}\"", k, escape(v));
  if (e.text.empty() && e.children.empty()) {
    out += "/>\n";
    return;
  }
  out += '>';
  if (!e.children.empty()) {
    out += '\n';
    for (const auto& c : e.children) write(out, c, depth + 1);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
  } else {
    out += escape(e.text);
  }
  out += fmt::format("</{}>\n", e.tag);
}

Element shifted(const Element& e, double dy) {
  Element out = e;
  for (auto& [name, value] : out.attrs) {
    if (name == "y" || name == "y1" || name == "y2" || name == "cy") value = num(std::stod(value) + dy);
  }
  for (auto& p : out.points) p.second += dy;
  if (out.tag == "polyline" || out.tag == "polygon") {
    std::string pts;
    for (const auto& [x, y] : out.points) {
      if (!pts.empty()) pts += ' ';
      pts += num(x) + ',' + num(y);
    }
    for (auto& [name, value] : out.attrs) {
      if (name == "points") value = pts;
    }
  }
  for (auto& c : out.children) c = shifted(c, dy);
  return out;
}

std::string points_attr(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (const auto& [x, y] : pts) {
    if (!s.empty()) s += ' ';
    s += num(x) + ',' + num(y);
  }
  return s;
}

}  // namespace

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  if (std::abs(v) < 0.005) v = 0.0;  // avoid "-0.00"
  return fmt::format("{:.2f}", v);
}

Element& Element::attr(std::string name, std::string value) {
  attrs.emplace_back(std::move(name), std::move(value));
  return *this;
}

Element line(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
  Element e{"line", {}, {}, {}, {{x1, y1}, {x2, y2}}};
  e.attr("x1", num(x1)).attr("y1", num(y1)).attr("x2", num(x2)).attr("y2", num(y2));
  e.attr("stroke", std::string(stroke)).attr("stroke-width", num(width));
  return e;
}

Element rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
  Element e{"rect", {}, {}, {}, {{x, y}, {x + w, y + h}}};
  e.attr("x", num(x)).attr("y", num(y)).attr("width", num(w)).attr("height", num(h));
  e.attr("fill", std::string(fill)).attr("stroke", std::string(stroke));
  return e;
}

Element circle(double cx, double cy, double r, std::string_view fill) {
  Element e{"circle", {}, {}, {}, {{cx - r, cy - r}, {cx + r, cy + r}}};
  e.attr("cx", num(cx)).attr("cy", num(cy)).attr("r", num(r)).attr("fill", std::string(fill));
  return e;
}

Element polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width) {
  Element e{"polyline", {}, {}, {}, pts};
  e.attr("points", points_attr(pts)).attr("fill", "none").attr("stroke", std::string(stroke));
  e.attr("stroke-width", num(width));
  return e;
}

Element polygon(const std::vector<std::pair<double, double>>& pts, std::string_view fill) {
  Element e{"polygon", {}, {}, {}, pts};
  e.attr("points", points_attr(pts)).attr("fill", std::string(fill));
  return e;
}

Element text(double x, double y, std::string_view content, std::string_view anchor, double size) {
  Element e{"text", {}, std::string(content), {}, {{x, y}}};
  e.attr("x", num(x)).attr("y", num(y)).attr("font-size", num(size));
  e.attr("text-anchor", std::string(anchor));
  return e;
}

Element group(std::vector<Element> children) {
  Element e{"g", {}, {}, std::move(children), {}};
  return e;
}

Figure::Figure(double width, double height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {
  if (!(width > 0.0) || !(height > 0.0)) throw Error("figure needs a positive size");
}

Figure& Figure::add(Element e) {
  check_points(e, width_, height_);
  elements_.push_back(std::move(e));
  return *this;
}

std::string Figure::to_string() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\">\n",
      num(width_), num(height_));
  out += fmt::format("  <title>{}</title>\n", escape(title_));
  out += fmt::format("  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", num(width_),
                     num(height_));
  for (const auto& e : elements_) write(out, e, 1);
  out += "</svg>\n";
  return out;
}

Figure stack_vertically(const std::vector<Figure>& figures, std::string title) {
  double width = 1.0;
  double height = 0.0;
  for (const auto& f : figures) {
    width = std::max(width, f.width());
    height += f.height();
  }
  Figure out(width, std::max(height, 1.0), std::move(title));
  double offset = 0.0;
  for (const auto& f : figures) {
    std::vector<Element> children;
    for (const auto& e : f.elements()) children.push_back(shifted(e, offset));
    out.add(group(std::move(children)));
    offset += f.height();
  }
  return out;
}

}  // namespace stabench::svg
