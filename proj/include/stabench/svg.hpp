#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stabench::svg {

// One SVG element. Attributes keep insertion order so output is byte-stable;
// `points` records every coordinate for the viewbox check.
struct Element {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;
  std::vector<Element> children;
  std::vector<std::pair<double, double>> points;

  Element& attr(std::string name, std::string value);
  Element& cls(std::string value) { return attr("class", std::move(value)); }
};

Element line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
Element rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
Element circle(double cx, double cy, double r, std::string_view fill);
Element polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width = 1.5);
Element polygon(const std::vector<std::pair<double, double>>& pts, std::string_view fill);
// anchor: start | middle | end
Element text(double x, double y, std::string_view content, std::string_view anchor = "start", double size = 12.0);
Element group(std::vector<Element> children);

class Figure {
 public:
  Figure(double width, double height, std::string title);

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  const std::string& title() const noexcept { return title_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }

  // Throws if any coordinate is non-finite or outside [0, width] x [0, height].
  Figure& add(Element e);

  std::string to_string() const;

 private:
  double width_;
  double height_;
  std::string title_;
  std::vector<Element> elements_;
};

// Places figures one above the other in a single figure.
Figure stack_vertically(const std::vector<Figure>& figures, std::string title);

std::string escape(std::string_view s);
std::string num(double v);  // fixed two-decimal coordinate formatting

}  // namespace stabench::svg
