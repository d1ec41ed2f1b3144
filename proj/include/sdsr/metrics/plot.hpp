#pragma once

#include <string>
#include <vector>

namespace sdsr {

// Minimal file-based line-plot renderer (white canvas, axes, tick labels,
// one colored polyline per series). Enough for the robustness and training
// curves; no interactive UI by design.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

void render_line_plot(const std::string& png_path, const std::vector<PlotSeries>& series,
                      int width = 640, int height = 440);

}  // namespace sdsr
