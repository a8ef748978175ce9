#include "qrc/harness/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qrc::harness {

namespace {

constexpr double kLeft = 72, kRight = 160, kTop = 36, kBottom = 52;

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool drawable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!axis.drawable(v)) continue;
    lo = std::min(lo, axis.transform(v));
    hi = std::max(hi, axis.transform(v));
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  if (log) {
    axis.lo = std::floor(lo);
    axis.hi = std::ceil(hi);
    if (axis.hi == axis.lo) axis.hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
  }
  return axis;
}

std::vector<double> ticks(const Axis& axis) {
  std::vector<double> t;
  if (axis.log) {
    for (double e = axis.lo; e <= axis.hi + 1e-9; e += 1.0) t.push_back(e);
    return t;
  }
  const double span = axis.hi - axis.lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
  for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + 1e-12 * span; v += step) t.push_back(v);
  return t;
}

std::string tick_label(double v, bool log) {
  if (log) return fmt::format("1e{}", static_cast<int>(std::lround(v)));
  if (std::abs(v) < 1e-12) return "0";
  return fmt::format("{:.3g}", v);
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  std::vector<double> xs, ys;
  for (const Series& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    if (s.style != SeriesStyle::VerticalLine) ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = fit_axis(xs, spec.log_x);
  const Axis ay = fit_axis(ys, spec.log_y);
  const double w = spec.width, h = spec.height;
  const double pw = w - kLeft - kRight, ph = h - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  const auto py = [&](double v) { return kTop + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };
  const auto clip_y = [&](double v) { return std::clamp(v, kTop, kTop + ph); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      spec.width, spec.height);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kLeft + pw / 2,
                     escape(spec.title));
  svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);

  for (double t : ticks(ax)) {
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n", x, kTop, kTop + ph);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x, kTop + ph + 16,
                       tick_label(t, ax.log));
  }
  for (double t : ticks(ay)) {
    const double y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, y, kLeft + pw);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, y + 4,
                       tick_label(t, ay.log));
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, h - 14,
                     escape(spec.x_label));
  svg += fmt::format("<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
                     kTop + ph / 2, escape(spec.y_label));

  for (const Series& s : series) {
    switch (s.style) {
      case SeriesStyle::Dots:
      case SeriesStyle::Markers: {
        const double r = s.style == SeriesStyle::Dots ? 2.0 : 4.0;
        const char* opacity = s.style == SeriesStyle::Dots ? "0.45" : "1";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
          if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
          svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\" fill-opacity=\"{}\"/>\n", px(s.x[i]),
                             clip_y(py(s.y[i])), r, s.color, opacity);
        }
        break;
      }
      case SeriesStyle::Line:
      case SeriesStyle::DashedLine: {
        std::string points;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
          if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
          points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), clip_y(py(s.y[i])));
        }
        if (!points.empty()) {
          svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", points, s.color,
                             s.style == SeriesStyle::DashedLine ? " stroke-dasharray=\"6 4\"" : "");
        }
        break;
      }
      case SeriesStyle::VerticalLine:
        for (double x : s.x) {
          if (!ax.drawable(x)) continue;
          svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\" stroke-dasharray=\"3 3\"/>\n",
                             px(x), kTop, kTop + ph, s.color);
        }
        break;
    }
  }

  double ly = kTop + 8;
  for (const Series& s : series) {
    if (s.label.empty()) continue;
    const double lx = kLeft + pw + 14;
    svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n", lx, ly - 4, s.color);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 18, ly, escape(s.label));
    ly += 18;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace qrc::harness
