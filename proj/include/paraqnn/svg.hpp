#pragma once

// Minimal static line charts as SVG text.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "paraqnn/errors.hpp"

namespace paraqnn::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;  // dots instead of a polyline
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 420;
  std::size_t max_points = 2000;  // per series, by uniform stride
  std::vector<Series> series;
};

inline Chart make_chart(std::string title, std::string x_label, std::string y_label,
                        bool log_y = false) {
  Chart c;
  c.title = std::move(title);
  c.x_label = std::move(x_label);
  c.y_label = std::move(y_label);
  c.log_y = log_y;
  return c;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Indices kept when thinning n points to at most `cap`; always keeps the
/// last point.
inline std::vector<std::size_t> subsample(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = cap == 0 || n <= cap ? 1 : (n + cap - 1) / cap;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

inline std::string render(const Chart& chart) {
  constexpr double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = chart.width - left - right;
  const double ph = chart.height - top - bottom;

  auto ty = [&](double y) { return chart.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!chart.log_y || y > 0.0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw InputError("svg: series '" + s.name + "' x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 >= x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) +
         "\" height=\"" + std::to_string(chart.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(chart.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(chart.title) + "</text>\n";
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = left + pw * i / 4.0;
    const double gy = top + ph * (1.0 - i / 4.0);
    out += "<text x=\"" + num(gx) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" +
           tick(fx) + "</text>\n";
    out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(gy + 4) + "\" text-anchor=\"end\">" +
           tick(chart.log_y ? std::pow(10.0, fy) : fy) + "</text>\n";
  }
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(chart.height - 10.0) +
         "\" text-anchor=\"middle\">" + escape(chart.x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(chart.y_label) + (chart.log_y ? " (log)" : "") + "</text>\n";

  double legend_y = top + 14;
  for (const auto& s : chart.series) {
    const auto idx = subsample(s.x.size(), chart.max_points);
    if (s.markers) {
      out += "<g fill=\"" + s.color + "\" fill-opacity=\"0.5\">\n";
      for (auto i : idx)
        if (usable(s.x[i], s.y[i]))
          out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"1.5\"/>\n";
      out += "</g>\n";
    } else {
      out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
      for (auto i : idx)
        if (usable(s.x[i], s.y[i])) out += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      out += "\"/>\n";
    }
    out += "<rect x=\"" + num(left + pw - 150) + "\" y=\"" + num(legend_y - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    out += "<text x=\"" + num(left + pw - 135) + "\" y=\"" + num(legend_y) + "\">" + escape(s.name) +
           "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace paraqnn::svg
