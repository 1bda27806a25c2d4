#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "caislab/errors.hpp"

namespace caislab {

// Minimal self-contained SVG line plots: stacked panels, shared x axis,
// optional per-series uncertainty bands, vertical phase markers. Enough for
// the run reports; not a charting library.
struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> y;             // one value per step, x = 1..n
  std::vector<double> lo, hi;        // optional band, same length as y
};

struct SvgPanel {
  std::string title;
  std::vector<SvgSeries> series;
  std::vector<double> vlines;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string sanitize_id(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_');
  return out;
}

}  // namespace svg_detail

inline std::string render_svg(const std::string& title,
                              const std::vector<SvgPanel>& panels,
                              int width = 900, int panel_height = 220) {
  if (panels.empty()) throw ContractViolation("render_svg: no panels");
  const double ml = 64, mr = 16, mt = 28, mb = 30, gap = 14, title_h = 26;
  double total_h = title_h + panels.size() * (panel_height + gap) + 4;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << static_cast<int>(total_h) << "\" viewBox=\"0 0 " << width
     << ' ' << static_cast<int>(total_h) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" "
        "font-weight=\"bold\">" << title << "</text>\n";

  double panel_top = title_h;
  for (const SvgPanel& panel : panels) {
    std::size_t n = 0;
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const SvgSeries& s : panel.series) {
      n = std::max(n, s.y.size());
      auto scan = [&](const std::vector<double>& v) {
        for (double x : v) {
          if (!std::isfinite(x)) continue;
          if (first) { ymin = ymax = x; first = false; }
          ymin = std::min(ymin, x);
          ymax = std::max(ymax, x);
        }
      };
      scan(s.y);
      scan(s.lo);
      scan(s.hi);
    }
    if (n < 2) throw ContractViolation("render_svg: series needs at least 2 points");
    if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }
    double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    double x0 = ml, x1 = width - mr;
    double y0 = panel_top + mt, y1 = panel_top + panel_height - mb;
    auto X = [&](double step) { return x0 + (step - 1) / (n - 1.0) * (x1 - x0); };
    auto Y = [&](double v) { return y1 - (v - ymin) / (ymax - ymin) * (y1 - y0); };

    os << "<text x=\"" << ml << "\" y=\"" << svg_detail::num(panel_top + 18)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << panel.title
       << "</text>\n";
    os << "<rect x=\"" << svg_detail::num(x0) << "\" y=\"" << svg_detail::num(y0)
       << "\" width=\"" << svg_detail::num(x1 - x0) << "\" height=\""
       << svg_detail::num(y1 - y0)
       << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";

    for (int t = 0; t <= 4; ++t) {
      double v = ymin + t * (ymax - ymin) / 4.0;
      double y = Y(v);
      os << "<line x1=\"" << svg_detail::num(x0) << "\" y1=\"" << svg_detail::num(y)
         << "\" x2=\"" << svg_detail::num(x1) << "\" y2=\"" << svg_detail::num(y)
         << "\" stroke=\"#eee\" stroke-width=\"1\"/>\n";
      os << "<text x=\"" << svg_detail::num(x0 - 6) << "\" y=\""
         << svg_detail::num(y + 4)
         << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
         << svg_detail::tick_label(v) << "</text>\n";
    }
    for (std::size_t t = 0; t < n; t += 500) {
      double x = X(static_cast<double>(t == 0 ? 1 : t));
      os << "<text x=\"" << svg_detail::num(x) << "\" y=\"" << svg_detail::num(y1 + 14)
         << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
         << (t == 0 ? 1 : t) << "</text>\n";
    }

    for (double v : panel.vlines) {
      if (v < 1 || v > static_cast<double>(n)) continue;
      os << "<line x1=\"" << svg_detail::num(X(v)) << "\" y1=\"" << svg_detail::num(y0)
         << "\" x2=\"" << svg_detail::num(X(v)) << "\" y2=\"" << svg_detail::num(y1)
         << "\" stroke=\"#888\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
    }

    double legend_x = x0 + 8;
    for (const SvgSeries& s : panel.series) {
      if (!s.lo.empty()) {
        if (s.lo.size() != s.y.size() || s.hi.size() != s.y.size())
          throw ContractViolation("render_svg: band size mismatch");
        os << "<path id=\"" << svg_detail::sanitize_id(s.name) << "_band\" d=\"M";
        for (std::size_t i = 0; i < n; ++i)
          os << svg_detail::num(X(static_cast<double>(i + 1))) << ' '
             << svg_detail::num(Y(s.hi[i])) << (i + 1 < n ? " L" : " ");
        for (std::size_t k = n; k-- > 0;)
          os << "L" << svg_detail::num(X(static_cast<double>(k + 1))) << ' '
             << svg_detail::num(Y(s.lo[k])) << ' ';
        os << "Z\" fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      }
      os << "<polyline id=\"" << svg_detail::sanitize_id(s.name)
         << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\" points=\"";
      for (std::size_t i = 0; i < s.y.size(); ++i) {
        os << svg_detail::num(X(static_cast<double>(i + 1))) << ','
           << svg_detail::num(Y(s.y[i]));
        if (i + 1 < s.y.size()) os << ' ';
      }
      os << "\"/>\n";
      os << "<text x=\"" << svg_detail::num(legend_x) << "\" y=\""
         << svg_detail::num(y0 + 12)
         << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << s.color << "\">"
         << s.name << "</text>\n";
      legend_x += 9.0 * (s.name.size() + 2);
    }
    panel_top += panel_height + gap;
  }
  os << "</svg>\n";
  return os.str();
}

// Trailing moving average, window w; the first w-1 entries average what is
// available so the series keeps its length.
inline std::vector<double> smooth(const std::vector<double>& y, int w) {
  if (w <= 1) return y;
  std::vector<double> out(y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc += y[i];
    if (i >= static_cast<std::size_t>(w)) acc -= y[i - w];
    out[i] = acc / std::min<std::size_t>(i + 1, w);
  }
  return out;
}

}  // namespace caislab
