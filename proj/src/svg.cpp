#include "bridgelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace bridgelab {

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 180.0, kTop = 40.0, kBottom = 50.0;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

}  // namespace

std::string render_log_plot(const Report& report, const std::vector<std::string>& metrics, const std::string& title) {
  std::map<std::string, std::vector<std::pair<int, double>>> series;
  for (const auto& m : metrics) series[m];
  for (const auto& row : report.rows) {
    auto it = series.find(row.metric);
    if (it != series.end() && row.value > 0.0 && std::isfinite(row.value)) it->second.push_back({row.step, row.value});
  }
  int xmin = std::numeric_limits<int>::max(), xmax = std::numeric_limits<int>::min();
  double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
  for (const auto& [name, pts] : series)
    for (const auto& [n, v] : pts) {
      xmin = std::min(xmin, n);
      xmax = std::max(xmax, n);
      lmin = std::min(lmin, std::log10(v));
      lmax = std::max(lmax, std::log10(v));
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    lmin = -1.0;
    lmax = 0.0;
  }
  if (xmax == xmin) xmax = xmin + 1;
  lmin = std::floor(lmin);
  lmax = std::ceil(lmax);
  if (lmax <= lmin) lmax = lmin + 1.0;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double n) { return kLeft + pw * (n - xmin) / (xmax - xmin); };
  auto py = [&](double lv) { return kTop + ph * (lmax - lv) / (lmax - lmin); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kLeft) + "\" y=\"22\" font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  const int decades = static_cast<int>(lmax - lmin);
  const int dstep = std::max(1, decades / 10);
  for (int k = 0; k <= decades; k += dstep) {
    double lv = lmin + k;
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(lv)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(py(lv)) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(lv) + 4) + "\" text-anchor=\"end\">1e" +
         std::to_string(static_cast<int>(lv)) + "</text>\n";
  }
  const int span = xmax - xmin;
  const int xstep = std::max(1, span / 8);
  for (int n = xmin; n <= xmax; n += xstep)
    s += "<text x=\"" + num(px(n)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         std::to_string(n) + "</text>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">n</text>\n";

  std::size_t color = 0;
  for (const auto& m : metrics) {
    const auto& pts = series[m];
    const char* c = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
    double ly = kTop + 14.0 * static_cast<double>(color) + 6.0;
    s += "<line x1=\"" + num(kLeft + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + pw + 30) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kLeft + pw + 34) + "\" y=\"" + num(ly + 4) + "\">" + escape(m) + "</text>\n";
    ++color;
    if (pts.empty()) continue;
    s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += ' ';
      s += num(px(pts[i].first)) + "," + num(py(std::log10(pts[i].second)));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace bridgelab
