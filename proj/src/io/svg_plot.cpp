// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tdeed/core/errors.hpp"
#include "tdeed/io/csv.hpp"

namespace tdeed::io {
namespace {

constexpr int kW = 800, kH = 500;
constexpr int kLeft = 70, kRight = 160, kTop = 50, kBottom = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0, hi = 1;
};

Range fit(const std::vector<Series>& series, bool use_x) {
  Range r;
  bool any = false;
  for (const auto& s : series) {
    for (const double v : (use_x ? s.x : s.y)) {
      if (!any) {
        r.lo = r.hi = v;
        any = true;
      }
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  if (!any) return {0, 1};
  if (r.hi == r.lo) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  const double pad = 0.05 * (r.hi - r.lo);
  return {r.lo - pad, r.hi + pad};
}

std::string esc(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  const Range rx = fit(series, true);
  const Range ry = fit(series, false);
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  const auto px = [&](double v) {
    return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w;
  };
  const auto py = [&](double v) {
    return kTop + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
     << "\" height=\"" << kH << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
     << "font-size=\"18\">" << esc(title) << "</text>\n";

  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
     << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
    os << "<line x1=\"" << fmt_num(px(fx)) << "\" y1=\"" << kTop + plot_h
       << "\" x2=\"" << fmt_num(px(fx)) << "\" y2=\"" << kTop + plot_h + 5
       << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << fmt_num(px(fx)) << "\" y=\"" << kTop + plot_h + 20
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_num(fx)
       << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt_num(py(fy)) << "\" x2=\""
       << kLeft << "\" y2=\"" << fmt_num(py(fy)) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt_num(py(fy) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_num(fy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 15
     << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(x_label)
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
     << kTop + plot_h / 2 << ")\">" << esc(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    check_contract(s.x.size() == s.y.size(), "plot: series x/y length mismatch");
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) os << " ";
      os << fmt_num(px(s.x[i])) << "," << fmt_num(py(s.y[i]));
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << fmt_num(px(s.x[i])) << "\" cy=\""
         << fmt_num(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";

    const int ly = kTop + 10 + static_cast<int>(si) * 18;
    os << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
       << kW - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly + 4
       << "\" font-size=\"12\">" << esc(s.name) << "</text>\n";
  }
  os << "</svg>\n";

  std::ofstream f(path);
  check_io(static_cast<bool>(f), "cannot open for writing: " + path);
  f << os.str();
  check_io(static_cast<bool>(f), "write failed: " + path);
}

}  // namespace tdeed::io
