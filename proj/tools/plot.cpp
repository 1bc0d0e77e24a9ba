#include "plot.hpp"

#include <algorithm>
#include <cstdio>

#include "mgadn/io.hpp"

namespace mgadn::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string render_score_svg(const ScoreTable& table, const PlotLayout& layout) {
  const double x0 = layout.margin_left;
  const double x1 = layout.width - layout.margin_right;
  const double y_top = layout.margin_top;
  const double y_bottom = layout.height - layout.margin_bottom;

  double lo = table.threshold, hi = table.threshold;
  for (double a : table.A) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double pad = (hi - lo) > 0.0 ? 0.05 * (hi - lo) : 1.0;
  lo -= pad;
  hi += pad;

  const double t_first = static_cast<double>(table.t.front());
  const double t_last = static_cast<double>(table.t.back());
  const double t_span = t_last > t_first ? t_last - t_first : 1.0;
  auto xmap = [&](double t) { return x0 + (t - t_first) / t_span * (x1 - x0); };
  auto ymap = [&](double v) { return y_bottom - (v - lo) / (hi - lo) * (y_bottom - y_top); };
  const double step = (x1 - x0) / std::max<double>(1.0, static_cast<double>(table.t.size()));

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(layout.width) + "\" height=\"" +
       num(layout.height) + "\" viewBox=\"0 0 " + num(layout.width) + ' ' + num(layout.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<g id=\"plot\" data-y-min=\"" + format_number(lo) + "\" data-y-max=\"" + format_number(hi) +
       "\" data-top=\"" + num(y_top) + "\" data-bottom=\"" + num(y_bottom) + "\">\n";

  if (!table.label.empty()) {
    s += "<g id=\"labels\" fill=\"#f4a6a6\" fill-opacity=\"0.5\">\n";
    std::size_t i = 0;
    while (i < table.label.size()) {
      if (!table.label[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < table.label.size() && table.label[j + 1]) ++j;
      const double xa = xmap(static_cast<double>(table.t[i])) - step / 2;
      const double xb = xmap(static_cast<double>(table.t[j])) + step / 2;
      s += "<rect x=\"" + num(xa) + "\" y=\"" + num(y_top) + "\" width=\"" + num(xb - xa) + "\" height=\"" +
           num(y_bottom - y_top) + "\"/>\n";
      i = j + 1;
    }
    s += "</g>\n";
  }

  s += "<polyline id=\"score\" fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    if (i) s += ' ';
    s += num(xmap(static_cast<double>(table.t[i]))) + ',' + num(ymap(table.A[i]));
  }
  s += "\"/>\n";

  const double ty = ymap(table.threshold);
  s += "<line id=\"threshold\" x1=\"" + num(x0) + "\" x2=\"" + num(x1) + "\" y1=\"" + num(ty) + "\" y2=\"" + num(ty) +
       "\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\" data-value=\"" + format_number(table.threshold) + "\"/>\n";

  s += "<g stroke=\"black\" fill=\"none\">\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y_bottom) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y_bottom) +
       "\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y_top) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y_bottom) +
       "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<text x=\"" + num(x0) + "\" y=\"" + num(y_bottom + 16) + "\">t=" + std::to_string(table.t.front()) +
       "</text>\n";
  s += "<text x=\"" + num(x1) + "\" y=\"" + num(y_bottom + 16) + "\" text-anchor=\"end\">t=" +
       std::to_string(table.t.back()) + "</text>\n";
  s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y_top + 4) + "\" text-anchor=\"end\">" + num(hi) + "</text>\n";
  s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y_bottom) + "\" text-anchor=\"end\">" + num(lo) + "</text>\n";
  s += "<text x=\"" + num(x1) + "\" y=\"" + num(ty - 4) + "\" text-anchor=\"end\" fill=\"#c0392b\">threshold " +
       num(table.threshold) + "</text>\n";
  s += "</g>\n</g>\n</svg>\n";
  return s;
}

}  // namespace mgadn::cli
