#pragma once

#include <string>
#include <vector>

namespace qrc::harness {

enum class SeriesStyle { Dots, Markers, Line, DashedLine, VerticalLine };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // unused for VerticalLine
  SeriesStyle style = SeriesStyle::Line;
  std::string color = "#6a3d9a";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

// Static SVG with a fixed layout. Points that cannot be drawn (non-finite, or
// non-positive on a log axis) are skipped. Output depends only on the inputs.
std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace qrc::harness
