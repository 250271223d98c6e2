#include "elicit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "elicit/errors.hpp"

namespace elicit::svg {

namespace {

struct Frame {
  int width, height;
  double margin_l = 64, margin_r = 16, margin_t = 36, margin_b = 48;
  double xmin, xmax, ymin, ymax;

  double px(double x) const {
    return margin_l + (x - xmin) / (xmax - xmin) * (width - margin_l - margin_r);
  }
  double py(double y) const {
    return height - margin_b -
           (y - ymin) / (ymax - ymin) * (height - margin_t - margin_b);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round tick spacing to a 1/2/5 decade multiple.
std::vector<double> ticks(double lo, double hi, int target = 5) {
  std::vector<double> out;
  double span = hi - lo;
  if (!(span > 0)) return {lo};
  double raw = span / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) out.push_back(t == 0.0 ? 0.0 : t);
  return out;
}

void pad_range(double& lo, double& hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) {
    lo = 0.0;
    hi = 1.0;
  }
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string header(int w, int h) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  std::to_string(w) + "\" height=\"" + std::to_string(h) +
                  "\" viewBox=\"0 0 " + std::to_string(w) + " " +
                  std::to_string(h) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  double x0 = f.margin_l, x1 = f.width - f.margin_r;
  double y0 = f.height - f.margin_b, y1 = f.margin_t;
  s += "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) +
       "\" y2=\"" + fmt(y0) + "\"/>\n";
  s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) +
       "\" y2=\"" + fmt(y1) + "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : ticks(f.xmin, f.xmax)) {
    double x = f.px(t);
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x) +
         "\" y2=\"" + fmt(y0 + 4) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y0 + 16) +
         "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
  }
  for (double t : ticks(f.ymin, f.ymax)) {
    double y = f.py(t);
    s += "<line x1=\"" + fmt(x0 - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
         fmt(x0) + "\" y2=\"" + fmt(y) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + fmt(x0 - 7) + "\" y=\"" + fmt(y + 4) +
         "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
  }
  s += "<text x=\"" + fmt(0.5 * (x0 + x1)) + "\" y=\"" +
       fmt(f.height - 10.0) + "\" text-anchor=\"middle\" font-size=\"13\">" +
       escape(xlabel) + "</text>\n";
  s += "<text x=\"14\" y=\"" + fmt(0.5 * (y0 + y1)) +
       "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 " +
       fmt(0.5 * (y0 + y1)) + ")\">" + escape(ylabel) + "</text>\n";
  s += "<text x=\"" + fmt(0.5 * (x0 + x1)) + "\" y=\"22\" " +
       "text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  s += "</g>\n";
  return s;
}

}  // namespace

std::string line_plot(const std::vector<Series>& series,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, int width, int height) {
  if (series.empty()) throw EmptyInput("nothing to plot");
  Frame f;
  f.width = width;
  f.height = height;
  f.xmin = f.ymin = std::numeric_limits<double>::infinity();
  f.xmax = f.ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw DimensionMismatch("series x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.xmin = std::min(f.xmin, s.x[i]);
      f.xmax = std::max(f.xmax, s.x[i]);
      f.ymin = std::min(f.ymin, s.y[i]);
      f.ymax = std::max(f.ymax, s.y[i]);
    }
  }
  pad_range(f.xmin, f.xmax);
  pad_range(f.ymin, f.ymax);

  std::string out = header(width, height) + axes(f, title, xlabel, ylabel);
  double legend_y = f.margin_t + 6;
  for (const auto& s : series) {
    if (s.points_only) {
      out += "<g fill=\"" + s.color + "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out += "<circle cx=\"" + fmt(f.px(s.x[i])) + "\" cy=\"" +
               fmt(f.py(s.y[i])) + "\" r=\"3\"/>\n";
      out += "</g>\n";
    } else if (!s.x.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out += fmt(f.px(s.x[i])) + "," + fmt(f.py(s.y[i]));
        if (i + 1 < s.x.size()) out += " ";
      }
      out += "\"/>\n";
    }
    if (!s.label.empty()) {
      double lx = width - f.margin_r - 130;
      out += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(legend_y - 5) +
             "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
      out += "<text x=\"" + fmt(lx + 15) + "\" y=\"" + fmt(legend_y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" +
             escape(s.label) + "</text>\n";
      legend_y += 16;
    }
  }
  return out + "</svg>\n";
}

std::string bar_chart(const std::vector<double>& centers,
                      const std::vector<double>& values,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel,
                      std::optional<double> reference, int width, int height) {
  if (centers.empty()) throw EmptyInput("nothing to plot");
  if (centers.size() != values.size())
    throw DimensionMismatch("bar centers and values differ in length");
  Frame f;
  f.width = width;
  f.height = height;
  f.xmin = *std::min_element(centers.begin(), centers.end());
  f.xmax = *std::max_element(centers.begin(), centers.end());
  f.ymin = std::min(0.0, *std::min_element(values.begin(), values.end()));
  f.ymax = std::max(0.0, *std::max_element(values.begin(), values.end()));
  if (reference) {
    f.ymin = std::min(f.ymin, *reference);
    f.ymax = std::max(f.ymax, *reference);
  }
  pad_range(f.xmin, f.xmax);
  pad_range(f.ymin, f.ymax);

  std::string out = header(width, height) + axes(f, title, xlabel, ylabel);
  double bw = (f.px(f.xmax) - f.px(f.xmin)) /
              (3.0 * static_cast<double>(centers.size()));
  double base = f.py(0.0);
  out += "<g fill=\"#1f77b4\">\n";
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double x = f.px(centers[i]);
    double y = f.py(values[i]);
    double top = std::min(y, base), h = std::abs(base - y);
    out += "<rect x=\"" + fmt(x - 0.5 * bw) + "\" y=\"" + fmt(top) +
           "\" width=\"" + fmt(bw) + "\" height=\"" + fmt(std::max(h, 0.5)) +
           "\"/>\n";
  }
  out += "</g>\n";
  if (reference) {
    double y = f.py(*reference);
    out += "<line x1=\"" + fmt(f.px(f.xmin)) + "\" y1=\"" + fmt(y) +
           "\" x2=\"" + fmt(f.px(f.xmax)) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  }
  return out + "</svg>\n";
}

}  // namespace elicit::svg
