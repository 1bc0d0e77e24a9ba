#pragma once

#include <string>

#include "mgadn/scoring.hpp"

namespace mgadn::cli {

struct PlotLayout {
  double width = 960.0;
  double height = 360.0;
  double margin_left = 64.0;
  double margin_right = 24.0;
  double margin_top = 24.0;
  double margin_bottom = 40.0;
};

// SVG trace of A(t) with the threshold as a horizontal line and labeled
// rows shaded. The plot group carries its value range as data attributes
// so positions can be mapped back to scores.
std::string render_score_svg(const ScoreTable& table, const PlotLayout& layout = {});

}  // namespace mgadn::cli
