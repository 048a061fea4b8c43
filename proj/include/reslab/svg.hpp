#pragma once

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "billiard.hpp"
#include "polygon.hpp"

namespace reslab {

// Minimal SVG writer. The view box is the data bounding box plus 5% margin,
// y points up, colors come from a fixed palette by index.
class SvgCanvas {
 public:
  SvgCanvas(Point<double> lo, Point<double> hi) {
    const double w = std::max(hi.x - lo.x, 1e-12), h = std::max(hi.y - lo.y, 1e-12);
    const double m = 0.05 * std::max(w, h);
    x0_ = lo.x - m, y0_ = lo.y - m, w_ = w + 2 * m, h_ = h + 2 * m;
    stroke_ = 0.004 * std::max(w_, h_);
  }

  template <class T>
  static SvgCanvas for_polygon(const RectilinearPolygon<T>& P) {
    const auto [lo, hi] = P.bbox();
    return SvgCanvas({to_double(lo.x), to_double(lo.y)}, {to_double(hi.x), to_double(hi.y)});
  }

  static const char* color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
  }

  template <class T>
  void polygon(const RectilinearPolygon<T>& P, const std::string& fill = "#f2f2f2", const std::string& stroke = "#000") {
    std::ostringstream d;
    d << std::setprecision(10);
    for (const auto& l : P.loops()) {
      for (std::size_t k = 0; k < l.size(); ++k)
        d << (k ? " L " : "M ") << to_double(l[k].x) << ' ' << to_double(l[k].y);
      d << " Z ";
    }
    body_ << "<path d=\"" << d.str() << "\" fill=\"" << fill << "\" fill-rule=\"evenodd\" stroke=\"" << stroke
          << "\" stroke-width=\"" << stroke_ << "\"/>\n";
  }

  template <class T>
  void polyline(const std::vector<Point<T>>& pts, std::size_t color_index, double width_scale = 0.6) {
    std::ostringstream d;
    d << std::setprecision(10);
    for (const auto& p : pts) d << to_double(p.x) << ',' << to_double(p.y) << ' ';
    body_ << "<polyline points=\"" << d.str() << "\" fill=\"none\" stroke=\"" << color(color_index)
          << "\" stroke-width=\"" << stroke_ * width_scale << "\"/>\n";
  }

  void marker(Point<double> p, const std::string& fill = "#d62728") {
    body_ << std::setprecision(10) << "<circle cx=\"" << p.x << "\" cy=\"" << p.y << "\" r=\"" << 2.5 * stroke_
          << "\" fill=\"" << fill << "\"/>\n";
  }

  // concave corners are the singular ones
  template <class T>
  void mark_concave_corners(const RectilinearPolygon<T>& P) {
    for (const auto& c : P.corners())
      if (!c.convex) marker({to_double(c.p.x), to_double(c.p.y)});
  }

  std::string str() const {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0_ << ' ' << -(y0_ + h_) << ' ' << w_ << ' ' << h_
       << "\" width=\"600\" height=\"" << static_cast<int>(600 * h_ / w_) << "\">\n"
       << "<g transform=\"scale(1,-1)\">\n"
       << body_.str() << "</g>\n</svg>\n";
    return os.str();
  }

 private:
  double x0_ = 0, y0_ = 0, w_ = 1, h_ = 1, stroke_ = 0.01;
  std::ostringstream body_;
};

}  // namespace reslab
